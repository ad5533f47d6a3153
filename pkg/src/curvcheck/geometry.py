"""Pointwise differential geometry of a coordinate-chart metric.

A MetricSpec holds the n x n matrix of metric component expressions,
constant bindings and an admissibility predicate.  frame() evaluates
the metric together with its exact first and second derivatives at a
point and assembles the full curvature packet:

    Gamma^h_ij = (1/2) g^{hs} (d_i g_js + d_j g_is - d_s g_ij)
    R_hijk     = g_hs (d_k Gamma^s_ij - d_j Gamma^s_ik
                 + Gamma^r_ij Gamma^s_rk - Gamma^r_ik Gamma^s_rj)
    S_ij       = g^{ad} R_aijd,    kappa = g^{ij} S_ij
    C          = R - (g^S)/(n-2) + kappa G / ((n-2)(n-1))

The sign convention in R_hijk above is fixed once and for all; every
identity checked elsewhere in the package assumes it.  With this
convention the unit 2-sphere has R_1221 = 𝔞𝔟 > 0 and kappa = 2.

Derivatives of Gamma never use finite differences: d Gamma is an
algebraic function of g, dg and d2g, all of which are evaluated from
exact symbolic derivatives of the component expressions.  Frames for
different points are independent; MetricSpec is immutable and safe to
share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import expr as ex
from .curvops import kulkarni_nomizu, unit_curvature

__all__ = [
    "GeometryError",
    "SingularMetricError",
    "InadmissiblePointError",
    "MetricSpec",
    "PointFrame",
    "metric_spec",
    "diagonal_metric",
    "flat_metric",
    "constant_curvature_2d",
    "admissible",
    "require_admissible",
    "frame",
    "christoffel",
    "riemann",
    "ricci_scalar_weyl",
    "gauss_curvature",
    "covariant_derivative_02",
    "second_bianchi_residual",
]

# Below this determinant-to-scale ratio the metric counts as singular.
_DET_RATIO = 1e-12
# "nonzero" admissibility conditions use this absolute floor.
_NONZERO_FLOOR = 1e-12


class GeometryError(ValueError):
    pass


class SingularMetricError(GeometryError):
    pass


class InadmissiblePointError(GeometryError):
    pass


Condition = tuple  # (Expr, "positive" | "nonzero")


@dataclass(frozen=True)
class MetricSpec:
    """Immutable chart metric: coordinates, component ASTs, constants.

    components is symmetric with shared AST references (the [i][j] and
    [j][i] entries are the same object).  conditions lists expressions
    required positive or nonzero for a point to be admissible; the
    determinant check is automatic and always on.
    """

    coords: tuple[str, ...]
    components: tuple[tuple[ex.Expr, ...], ...]
    bindings: ex.Bindings = field(default_factory=ex.Bindings)
    conditions: tuple[Condition, ...] = ()
    signature: str | None = None

    @property
    def dim(self) -> int:
        return len(self.coords)

    def component(self, i: int, j: int) -> ex.Expr:
        return self.components[i][j]

    def point_map(self, point: Sequence[float]) -> dict[str, float]:
        return dict(zip(self.coords, map(float, point)))


def _parse_maybe(entry, coords, const_names) -> ex.Expr:
    if isinstance(entry, str):
        return ex.parse(entry, coords, const_names)
    if isinstance(entry, (int, float)):
        return ex.Num(float(entry))
    return entry


def metric_spec(
    coords: Sequence[str],
    components,
    bindings: Mapping[str, float] | None = None,
    conditions: Iterable = (),
    signature: str | None = None,
) -> MetricSpec:
    """Build a MetricSpec, accepting strings or Expr for components.

    The upper triangle is authoritative; a lower-triangle entry must be
    structurally equal to its mirror or be omitted (None).  Condition
    entries are (expression, "positive"|"nonzero") pairs.
    """
    coords = tuple(coords)
    b = bindings if isinstance(bindings, ex.Bindings) else ex.Bindings(bindings or {})
    names = tuple(b)
    n = len(coords)
    rows = [list(row) for row in components]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise GeometryError(f"component matrix must be {n}x{n}")
    parsed: list[list[ex.Expr | None]] = [
        [None if rows[i][j] is None else _parse_maybe(rows[i][j], coords, names) for j in range(n)]
        for i in range(n)
    ]
    sym: list[list[ex.Expr]] = [[ex.Num(0.0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            upper, lower = parsed[i][j], parsed[j][i]
            if upper is None and lower is None:
                raise GeometryError(f"component ({i},{j}) missing")
            if upper is not None and lower is not None and i != j and upper != lower:
                raise GeometryError(f"components ({i},{j}) and ({j},{i}) differ structurally")
            entry = upper if upper is not None else lower
            sym[i][j] = entry
            sym[j][i] = entry
    conds = tuple(
        (_parse_maybe(c, coords, names), kind)
        for c, kind in conditions
    )
    for c, kind in conds:
        if kind not in ("positive", "nonzero"):
            raise GeometryError(f"unknown condition kind {kind!r}")
    return MetricSpec(coords, tuple(tuple(r) for r in sym), b, conds, signature)


def diagonal_metric(coords, diagonal, bindings=None, conditions=(), signature=None) -> MetricSpec:
    n = len(coords)
    comps = [[(diagonal[i] if i == j else 0.0) for j in range(n)] for i in range(n)]
    return metric_spec(coords, comps, bindings, conditions, signature)


def flat_metric(dim: int, prefix: str = "x") -> MetricSpec:
    coords = tuple(f"{prefix}{i + 1}" for i in range(dim))
    return diagonal_metric(coords, [1.0] * dim)


def constant_curvature_2d(
    b,
    gauss_curvature: float,
    energy: float,
    coords: Sequence[str] = ("x", "y"),
    bindings: Mapping[str, float] | None = None,
) -> MetricSpec:
    """Surface diag(𝔞, 𝔟) of constant Gauss curvature K.

    Given a profile 𝔟(x) the first component is forced to
    𝔞 = (𝔟')^2 / (𝔟 (E - 4K𝔟)), which pins the Gauss curvature to K
    wherever the chart is admissible; E selects the representative.
    """
    coords = tuple(coords)
    bmap = bindings if isinstance(bindings, ex.Bindings) else ex.Bindings(bindings or {})
    b_expr = _parse_maybe(b, coords, tuple(bmap))
    bp = ex.diff(b_expr, coords[0])
    denom_factor = ex.sub(ex.num(energy), ex.mul(ex.num(4.0 * gauss_curvature), b_expr))
    a_expr = ex.div(ex.intpow(bp, 2), ex.mul(b_expr, denom_factor))
    conds = (
        (b_expr, "nonzero"),
        (bp, "nonzero"),
        (denom_factor, "nonzero"),
    )
    return metric_spec(coords, [[a_expr, 0.0], [0.0, b_expr]], bmap, conds)


# ---------------------------------------------------------------------------
# Compiled evaluation of g, dg, d2g.  Only the independent entries are
# compiled (g symmetric in ij; d2g additionally symmetric in the two
# derivative slots); the mirror copies are filled in afterwards.

class _SpecEvaluator:
    def __init__(self, spec: MetricSpec):
        n = spec.dim
        coords = spec.coords
        self.n = n
        g_entries = [(i, j) for i in range(n) for j in range(i, n)]
        g_exprs = {ij: spec.components[ij[0]][ij[1]] for ij in g_entries}
        dg_exprs = {
            (k, i, j): ex.diff(g_exprs[(i, j)], coords[k])
            for k in range(n)
            for (i, j) in g_entries
        }
        d2g_exprs = {
            (l, k, i, j): ex.diff(dg_exprs[(k, i, j)], coords[l])
            for l in range(n)
            for k in range(l, n)
            for (i, j) in g_entries
        }
        self.g_keys = list(g_exprs)
        self.dg_keys = list(dg_exprs)
        self.d2g_keys = list(d2g_exprs)
        ordered = [g_exprs[k] for k in self.g_keys]
        ordered += [dg_exprs[k] for k in self.dg_keys]
        ordered += [d2g_exprs[k] for k in self.d2g_keys]
        self._fn = ex.compile_exprs(ordered, coords, spec.bindings)
        self._spec = spec
        self._sizes = (len(self.g_keys), len(self.dg_keys), len(self.d2g_keys))
        if spec.conditions:
            self._cond_fn = ex.compile_exprs(
                [c for c, _ in spec.conditions], coords, spec.bindings
            )
        else:
            self._cond_fn = None

    def tensors(self, point: Sequence[float]):
        n = self.n
        try:
            flat = self._fn(*point)
        except (ValueError, ZeroDivisionError, OverflowError):
            self._reraise_with_location(point)
            raise  # pragma: no cover
        ng, ndg, _ = self._sizes
        g = np.empty((n, n))
        dg = np.empty((n, n, n))
        d2g = np.empty((n, n, n, n))
        for idx, (i, j) in enumerate(self.g_keys):
            g[i, j] = g[j, i] = flat[idx]
        for idx, (k, i, j) in enumerate(self.dg_keys):
            v = flat[ng + idx]
            dg[k, i, j] = dg[k, j, i] = v
        for idx, (l, k, i, j) in enumerate(self.d2g_keys):
            v = flat[ng + ndg + idx]
            d2g[l, k, i, j] = d2g[l, k, j, i] = v
            d2g[k, l, i, j] = d2g[k, l, j, i] = v
        return g, dg, d2g

    def _reraise_with_location(self, point):
        # Slow path: re-run the same expressions through the tree-walk
        # evaluator so the raised DomainError names the subexpression.
        spec = self._spec
        pmap = spec.point_map(point)
        for i, j in self.g_keys:
            base = spec.components[i][j]
            ex.evaluate(base, pmap, spec.bindings)
            for ck in spec.coords:
                first = ex.diff(base, ck)
                ex.evaluate(first, pmap, spec.bindings)
                for cl in spec.coords:
                    ex.evaluate(ex.diff(first, cl), pmap, spec.bindings)

    def condition_values(self, point: Sequence[float]):
        if self._cond_fn is None:
            return ()
        return self._cond_fn(*point)


@lru_cache(maxsize=None)
def _evaluator(spec: MetricSpec) -> _SpecEvaluator:
    return _SpecEvaluator(spec)


def admissible(spec: MetricSpec, point: Sequence[float]) -> bool:
    """True when all declared conditions hold and the metric inverts."""
    try:
        values = _evaluator(spec).condition_values(point)
    except (ex.ExprError, ValueError, ZeroDivisionError, OverflowError):
        return False
    for v, (_, kind) in zip(values, spec.conditions):
        if kind == "positive" and not v > 0.0:
            return False
        if kind == "nonzero" and not abs(v) > _NONZERO_FLOOR:
            return False
    try:
        g, _, _ = _evaluator(spec).tensors(point)
    except (ex.ExprError, ValueError, ZeroDivisionError, OverflowError):
        return False
    return not _is_singular(g)


def require_admissible(spec: MetricSpec, point: Sequence[float]) -> None:
    values = _evaluator(spec).condition_values(point)
    for v, (cond, kind) in zip(values, spec.conditions):
        ok = v > 0.0 if kind == "positive" else abs(v) > _NONZERO_FLOOR
        if not ok:
            raise InadmissiblePointError(
                f"condition {ex.to_text(cond)!r} ({kind}) fails at {tuple(point)}: value {v!r}"
            )
    g, _, _ = _evaluator(spec).tensors(point)
    if _is_singular(g):
        raise SingularMetricError(f"metric is singular at {tuple(point)}")


def _is_singular(g: np.ndarray) -> bool:
    scale = float(np.prod(np.linalg.norm(g, axis=1))) + 1e-300
    return abs(float(np.linalg.det(g))) <= _DET_RATIO * scale


# ---------------------------------------------------------------------------
# PointFrame

@dataclass(frozen=True)
class PointFrame:
    """Everything the identity suites need at one point.

    weyl is the zero array, flagged via weyl_by_convention, for charts
    of dimension < 4 where the conformal tensor carries no content.
    """

    spec: MetricSpec
    point: tuple[float, ...]
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    ricci_sq: np.ndarray
    scalar: float
    weyl: np.ndarray
    weyl_by_convention: bool

    @property
    def dim(self) -> int:
        return len(self.point)


def frame(spec: MetricSpec, point: Sequence[float], check: bool = True) -> PointFrame:
    """Evaluate the full curvature packet at a point.

    Frames are cached per (spec, point); the verification suites touch
    the same points from several directions.  Callers must not mutate
    the returned arrays.
    """
    point = tuple(float(v) for v in point)
    if len(point) != spec.dim:
        raise GeometryError(f"point has {len(point)} coordinates, chart has {spec.dim}")
    return _frame_cached(spec, point, bool(check))


@lru_cache(maxsize=512)
def _frame_cached(spec: MetricSpec, point: tuple[float, ...], check: bool) -> PointFrame:
    if check:
        require_admissible(spec, point)
    g, dg, d2g = _evaluator(spec).tensors(point)
    if _is_singular(g):
        raise SingularMetricError(f"metric is singular at {point}")
    ginv = np.linalg.inv(g)
    n = spec.dim

    # B[i,j,s] = d_i g_js + d_j g_is - d_s g_ij
    B = dg + np.transpose(dg, (1, 0, 2)) - np.moveaxis(dg, 0, 2)
    gamma = 0.5 * np.einsum("hs,ijs->hij", ginv, B)

    # dB[k,i,j,s] = d_k B[i,j,s]; d_k g^{hs} = -g^{ha} (d_k g_ab) g^{bs}
    dB = (
        d2g
        + np.transpose(d2g, (0, 2, 1, 3))
        - np.transpose(d2g, (0, 2, 3, 1))
    )
    dginv = -np.einsum("ha,kab,bs->khs", ginv, dg, ginv)
    dgamma = 0.5 * (
        np.einsum("khs,ijs->khij", dginv, B) + np.einsum("hs,kijs->khij", ginv, dB)
    )

    rup = (
        np.transpose(dgamma, (1, 2, 3, 0))  # d_k Gamma^s_ij -> [s,i,j,k]
        - np.transpose(dgamma, (1, 2, 0, 3))  # d_j Gamma^s_ik -> [s,i,j,k]
        + np.einsum("rij,srk->sijk", gamma, gamma)
        - np.einsum("rik,srj->sijk", gamma, gamma)
    )
    riem = np.einsum("hs,sijk->hijk", g, rup)

    ricci = np.einsum("ad,aijd->ij", ginv, riem)
    scalar = float(np.einsum("ij,ij->", ginv, ricci))
    ricci_sq = ricci @ ginv @ ricci

    if n >= 4:
        weyl = (
            riem
            - kulkarni_nomizu(g, ricci) / (n - 2)
            + scalar * unit_curvature(g) / ((n - 2) * (n - 1))
        )
        flagged = False
    else:
        weyl = np.zeros_like(riem)
        flagged = True

    return PointFrame(
        spec, point, g, ginv, dg, d2g, gamma, dgamma, riem, ricci, ricci_sq,
        scalar, weyl, flagged,
    )


# Thin views over frame() matching the operation-level API.

def christoffel(spec: MetricSpec, point) -> np.ndarray:
    return frame(spec, point).gamma


def riemann(spec: MetricSpec, point) -> np.ndarray:
    return frame(spec, point).riemann


def ricci_scalar_weyl(spec: MetricSpec, point) -> tuple[np.ndarray, float, np.ndarray]:
    f = frame(spec, point)
    return f.ricci, f.scalar, f.weyl


def gauss_curvature(spec: MetricSpec, point) -> float:
    """Gauss curvature of a 2-dimensional chart: R_1221 / det g = kappa/2."""
    if spec.dim != 2:
        raise GeometryError(f"Gauss curvature needs a 2-dimensional chart, got {spec.dim}")
    f = frame(spec, point)
    det = float(np.linalg.det(f.g))
    return float(f.riemann[0, 1, 1, 0] / det)


# ---------------------------------------------------------------------------
# Covariant derivative of a (0,2) expression field

@lru_cache(maxsize=512)
def _cd02_evaluator(spec: MetricSpec, comps: tuple):
    n = spec.dim
    exprs = [comps[i * n + j] for i in range(n) for j in range(n)]
    dexprs = [ex.diff(e, c) for c in spec.coords for e in exprs]
    return ex.compile_exprs(list(exprs) + dexprs, spec.coords, spec.bindings)


def covariant_derivative_02(spec: MetricSpec, components, point) -> np.ndarray:
    """nabla_k T_ij of a (0,2) expression field, using this chart's connection.

    Returns the array indexed [k,i,j].  components may contain strings,
    numbers or Expr; the field need not be symmetric.
    """
    n = spec.dim
    names = tuple(spec.bindings)
    comps = tuple(
        _parse_maybe(components[i][j], spec.coords, names) for i in range(n) for j in range(n)
    )
    f = frame(spec, point)
    flat = _cd02_evaluator(spec, comps)(*f.point)
    T = np.array(flat[: n * n]).reshape(n, n)
    dT = np.array(flat[n * n :]).reshape(n, n, n)
    return (
        dT
        - np.einsum("ski,sj->kij", f.gamma, T)
        - np.einsum("skj,is->kij", f.gamma, T)
    )


# ---------------------------------------------------------------------------
# Smoke check: differential (second) Bianchi identity.  The cyclic sum
# nabla_l R_hijk + nabla_j R_hikl + nabla_k R_hilj must vanish; the
# derivative here is finite-differenced, so this is a coarse check only.

def second_bianchi_residual(spec: MetricSpec, point, step: float = 1e-5) -> float:
    base = frame(spec, point)
    n = spec.dim
    dR = np.empty((n, n, n, n, n))
    for l in range(n):
        hi = list(base.point)
        lo = list(base.point)
        hi[l] += step
        lo[l] -= step
        dR[l] = (frame(spec, hi, check=False).riemann - frame(spec, lo, check=False).riemann) / (
            2 * step
        )
    gam = base.gamma
    R = base.riemann
    nabla = (
        dR
        - np.einsum("slh,sijk->lhijk", gam, R)
        - np.einsum("sli,hsjk->lhijk", gam, R)
        - np.einsum("slj,hisk->lhijk", gam, R)
        - np.einsum("slk,hijs->lhijk", gam, R)
    )
    cyc = (
        nabla
        + np.transpose(nabla, (3, 1, 2, 4, 0))
        + np.transpose(nabla, (4, 1, 2, 0, 3))
    )
    return float(np.max(np.abs(cyc)) / (np.max(np.abs(R)) + 1.0))

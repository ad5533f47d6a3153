"""Geodesically related metric pairs and their compatibility equations.

Two metrics g, ḡ on a common chart are geodesically related through a
gradient covector ψ when

    ∇_k ḡ_ij = 2 ψ_k ḡ_ij + ψ_i ḡ_jk + ψ_j ḡ_ik          (∇ of g)

which shifts the connection by Γ̄^h_ij = Γ^h_ij + δ^h_i ψ_j + δ^h_j ψ_i
and the Ricci tensor by S̄_ij = S_ij - (n-1) ψ_ij with
ψ_ij = ∇_j ψ_i - ψ_i ψ_j.

Two constructions are provided.  GeodesicPair2D is the classical
surface pair: diag(𝔞(x), 𝔟(x)) maps onto
diag(p𝔞/(1+q𝔟)^2, p𝔟/(1+q𝔟)) with ψ₁ = -(q𝔟'/2)/(1+q𝔟).  build_family
lifts it to warped products: base 𝔞 = (𝔟')²/(𝔟(D𝔟-4C)) (Gauss
curvature -D/4), fiber of constant curvature, warp F = 𝔟(x)B(t)² with
B'' = C B, image warp F̄ = pF/(1+q𝔟).  Both members decompose as Roter
spaces and are pseudosymmetric of constant type, with

    L_R = -D/4,      L_R_image = -(D + 4qC)/(4p),

and the verify_* functions below certify every compatibility equation
and closed form the construction promises.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import expr as ex
from . import geometry as geo
from . import warped as wp
from .curvops import (
    constancy_residual,
    derivation_apply,
    max_abs_residual,
    scalar_residual,
    tachibana,
    tensor_residual,
    zero_residual,
)
from .roter import RoterFit, fit_roter

__all__ = [
    "GeodesicPair2D",
    "FamilyConfig",
    "Family",
    "PsiField",
    "FamilyError",
    "geodesic_pair_2d",
    "build_family",
    "profile_expr",
    "profile_invariant_residual",
    "geodesic_compatibility_residual",
    "christoffel_shift_residual",
    "pair_christoffel_closed_forms",
    "ricci_shift_residual",
    "family_psi_closed_forms",
    "family_image_ricci_forms",
    "warp_compatibility_residuals",
    "factor_relations",
    "psi_ricci_identity_residual",
    "warp_profile_pde_residuals",
    "base_gauss_values",
]

# Sampling guard: mapping quantities this close to zero are rejected.
GUARD_FLOOR = 1e-6


class FamilyError(geo.GeometryError):
    """Family construction rejected; reason in .reason."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


# ---------------------------------------------------------------------------
# ψ fields

@dataclass(frozen=True)
class PsiField:
    """Mapping covector: component expressions over a common chart."""

    coords: tuple[str, ...]
    exprs: tuple[ex.Expr, ...]
    bindings: ex.Bindings

    def values(self, point) -> np.ndarray:
        return np.array(_psi_eval(self)(*point)[: len(self.coords)])

    def second_form(self, spec: geo.MetricSpec, point) -> np.ndarray:
        """ψ_ij = ∂_j ψ_i - Γ^s_ij ψ_s - ψ_i ψ_j with Γ of the given metric."""
        n = len(self.coords)
        flat = _psi_eval(self)(*point)
        psi = np.array(flat[:n])
        dpsi = np.array(flat[n:]).reshape(n, n)  # dpsi[j,i] = d_j psi_i
        gamma = geo.frame(spec, point).gamma
        return dpsi.T - np.einsum("sij,s->ij", gamma, psi) - np.outer(psi, psi)

    def gradient_residual(self, point) -> float:
        """Antisymmetric part of ∂_j ψ_i; zero for gradient covectors."""
        n = len(self.coords)
        flat = _psi_eval(self)(*point)
        dpsi = np.array(flat[n:]).reshape(n, n)
        return float(np.max(np.abs(dpsi - dpsi.T)) / (np.max(np.abs(dpsi)) + 1.0))


@lru_cache(maxsize=None)
def _psi_eval(psi: PsiField):
    exprs = list(psi.exprs)
    for c in psi.coords:
        exprs.extend(ex.diff(e, c) for e in psi.exprs)
    return ex.compile_exprs(exprs, psi.coords, psi.bindings)


# ---------------------------------------------------------------------------
# Surface pairs

@dataclass(frozen=True)
class GeodesicPair2D:
    """diag(𝔞, 𝔟) and its geodesic image on a common (x, y) chart."""

    source: geo.MetricSpec
    image: geo.MetricSpec
    psi: PsiField
    map_scale: float
    map_shift: float


def _pair_components(a_expr, b_expr):
    one_plus_qb = ex.add(ex.num(1.0), ex.mul(ex.const("q"), b_expr))
    abar = ex.div(ex.mul(ex.const("p"), a_expr), ex.intpow(one_plus_qb, 2))
    bbar = ex.div(ex.mul(ex.const("p"), b_expr), one_plus_qb)
    return one_plus_qb, abar, bbar


def geodesic_pair_2d(
    a,
    b,
    map_scale: float,
    map_shift: float,
    coords=("x", "y"),
    bindings=None,
) -> GeodesicPair2D:
    """Classical surface pair; requires map_scale != 0 and map_shift != 0
    (a zero shift is the trivial mapping) and 𝔟' != 0 on the domain."""
    if map_scale == 0.0:
        raise FamilyError("TRIVIAL_MAPPING", "map_scale must be nonzero")
    if map_shift == 0.0:
        raise FamilyError("TRIVIAL_MAPPING", "map_shift must be nonzero")
    coords = tuple(coords)
    merged = dict(bindings or {})
    merged.update({"p": float(map_scale), "q": float(map_shift)})
    binds = ex.Bindings(merged)
    names = tuple(binds)
    a_expr = ex.parse(a, coords, names) if isinstance(a, str) else a
    b_expr = ex.parse(b, coords, names) if isinstance(b, str) else b
    bp = ex.diff(b_expr, coords[0])
    one_plus_qb, abar, bbar = _pair_components(a_expr, b_expr)
    shared = ((a_expr, "nonzero"), (b_expr, "nonzero"), (bp, "nonzero"))
    source = geo.metric_spec(coords, [[a_expr, 0.0], [0.0, b_expr]], binds, shared)
    image = geo.metric_spec(
        coords, [[abar, 0.0], [0.0, bbar]], binds, shared + ((one_plus_qb, "nonzero"),)
    )
    psi1 = ex.neg(ex.div(ex.mul(ex.const("q"), bp), ex.mul(ex.num(2.0), one_plus_qb)))
    psi = PsiField(coords, (psi1, ex.Num(0.0)), binds)
    return GeodesicPair2D(source, image, psi, float(map_scale), float(map_shift))


# ---------------------------------------------------------------------------
# The warped family

@dataclass(frozen=True)
class FamilyConfig:
    """Parameters of the warped family and its geodesic image.

    c drives the warp profile (B'' = c B), d sets the base Gauss
    curvature to -d/4; c1, c2 pick the profile representative; b is the
    base profile 𝔟(x) with 𝔟' != 0; the fiber is the constant-curvature
    model with the given scalar curvature.  allow_conformally_flat
    permits the degenerate (Einstein) member used as a control.
    """

    c: float
    d: float
    c1: float
    c2: float
    b: str = "x"
    fiber_dim: int = 2
    fiber_scalar: float = 2.0
    map_scale: float = 2.0
    map_shift: float = 1.0
    allow_conformally_flat: bool = False

    @property
    def n(self) -> int:
        return self.fiber_dim + 2


@dataclass(frozen=True)
class Family:
    """Source and image warped products plus the mapping covector."""

    cfg: FamilyConfig
    source: wp.WarpedSpec
    image: wp.WarpedSpec
    psi: PsiField
    pair: GeodesicPair2D
    profile: ex.Expr
    profile_invariant: float  # (B')^2 - c B^2, constant in t

    @property
    def l_r_expected(self) -> float:
        return -self.cfg.d / 4.0

    @property
    def l_r_image_expected(self) -> float:
        return -(self.cfg.d + 4.0 * self.cfg.map_shift * self.cfg.c) / (
            4.0 * self.cfg.map_scale
        )

    @property
    def image_base_scalar_expected(self) -> float:
        return 2.0 * self.l_r_image_expected

    def admissible_sample(self, point) -> bool:
        """Admissibility plus the near-singular-mapping guards."""
        if not (geo.admissible(self.source.product, point)
                and geo.admissible(self.image.product, point)):
            return False
        vals = _family_values(self, tuple(float(v) for v in point))
        return (
            abs(vals["one_plus_qb"]) >= GUARD_FLOOR
            and abs(vals["shape"]) >= GUARD_FLOOR
            and abs(vals["bp"]) >= GUARD_FLOOR
            and abs(vals["B"]) >= GUARD_FLOOR
        )


def profile_expr(cfg: FamilyConfig, coords=("x", "t")) -> ex.Expr:
    """B(t) solving B'' = c B in the branch matching the sign of c."""
    names = ("C", "C1", "C2")
    if cfg.c > 0:
        src = "C1*exp(sqrt(C)*t) + C2*exp(-sqrt(C)*t)"
    elif cfg.c < 0:
        src = "C1*cos(sqrt(-C)*t) + C2*sin(sqrt(-C)*t)"
    else:
        src = "C1*t + C2"
    return ex.parse(src, coords, names)


def _family_bindings(cfg: FamilyConfig) -> ex.Bindings:
    return ex.Bindings(
        C=cfg.c, D=cfg.d, C1=cfg.c1, C2=cfg.c2, p=cfg.map_scale, q=cfg.map_shift
    )


def build_family(cfg: FamilyConfig) -> Family:
    """Construct the source warped product, its geodesic image and ψ.

    Rejects trivial mappings (map_shift or map_scale zero) and, unless
    allow_conformally_flat is set, configurations whose fiber scalar
    curvature matches (n-3)(n-2)((B')^2 - cB^2): those members are
    Einstein and conformally flat, so the decomposition's open sets are
    empty and no Roter certification is possible.
    """
    if cfg.map_scale == 0.0 or cfg.map_shift == 0.0:
        raise FamilyError("TRIVIAL_MAPPING", "map_scale and map_shift must be nonzero")
    if cfg.fiber_dim < 2:
        raise FamilyError("BAD_FIBER", "fiber dimension must be at least 2")
    binds = _family_bindings(cfg)
    names = tuple(binds)
    coords2 = ("x", "t")
    b_expr = ex.parse(cfg.b, coords2, names) if isinstance(cfg.b, str) else cfg.b
    bp = ex.diff(b_expr, "x")
    shape = ex.sub(ex.mul(ex.const("D"), b_expr), ex.mul(ex.num(4.0), ex.const("C")))
    a_expr = ex.div(ex.intpow(bp, 2), ex.mul(b_expr, shape))

    profile = profile_expr(cfg, coords2)
    prof_d = ex.diff(profile, "t")
    invariant_expr = ex.sub(
        ex.intpow(prof_d, 2), ex.mul(ex.const("C"), ex.intpow(profile, 2))
    )
    invariant = ex.evaluate(invariant_expr, {"x": 0.0, "t": 0.0}, binds)

    n = cfg.n
    cflat_value = cfg.fiber_scalar / ((n - 3) * (n - 2))
    if not cfg.allow_conformally_flat and scalar_residual(cflat_value, invariant) <= 1e-9:
        raise FamilyError(
            "CONFORMALLY_DEGENERATE",
            "fiber scalar curvature matches (n-3)(n-2)((B')^2 - cB^2); the "
            "product is Einstein and conformally flat, so its curvature has "
            "no Roter decomposition on this chart",
        )

    one_plus_qb, abar, bbar = _pair_components(a_expr, b_expr)
    guards = (
        (b_expr, "nonzero"),
        (bp, "nonzero"),
        (shape, "nonzero"),
        (one_plus_qb, "nonzero"),
        (profile, "nonzero"),
    )
    base = geo.metric_spec(coords2, [[a_expr, 0.0], [0.0, b_expr]], binds, guards[:3])
    base_bar = geo.metric_spec(coords2, [[abar, 0.0], [0.0, bbar]], binds, guards[:4])
    fiber = wp.constant_curvature_fiber(cfg.fiber_dim, cfg.fiber_scalar)

    warp = ex.mul(b_expr, ex.intpow(profile, 2))
    warp_bar = ex.div(ex.mul(ex.const("p"), warp), one_plus_qb)
    source = wp.assemble(base, fiber, warp)
    image = wp.assemble(base_bar, fiber, warp_bar)

    chart = source.product.coords
    psi1 = ex.neg(ex.div(ex.mul(ex.const("q"), bp), ex.mul(ex.num(2.0), one_plus_qb)))
    psi = PsiField(chart, (psi1,) + (ex.Num(0.0),) * (n - 1), binds)
    pair = geodesic_pair_2d(a_expr, b_expr, cfg.map_scale, cfg.map_shift, coords2)
    return Family(cfg, source, image, psi, pair, profile, invariant)


@lru_cache(maxsize=None)
def _family_value_eval(fam: Family):
    cfg = fam.cfg
    binds = _family_bindings(cfg)
    coords = fam.source.product.coords
    b_expr = ex.parse(cfg.b, coords, tuple(binds)) if isinstance(cfg.b, str) else cfg.b
    bp = ex.diff(b_expr, "x")
    profile = fam.profile
    exprs = [
        b_expr,
        bp,
        profile,
        ex.diff(profile, "t"),
        fam.source.warp,
        fam.image.warp,
    ]
    return ex.compile_exprs(exprs, coords, binds)


def _family_values(fam: Family, point) -> dict[str, float]:
    b, bp, B, Bp, F, Fbar = _family_value_eval(fam)(*point)
    cfg = fam.cfg
    return {
        "b": b,
        "bp": bp,
        "B": B,
        "Bp": Bp,
        "F": F,
        "Fbar": Fbar,
        "one_plus_qb": 1.0 + cfg.map_shift * b,
        "shape": cfg.d * b - 4.0 * cfg.c,
    }


def profile_invariant_residual(cfg: FamilyConfig, ts=None) -> float:
    """Constancy of (B')^2 - c B^2 across sample values of t."""
    profile = profile_expr(cfg)
    prof_d = ex.diff(profile, "t")
    binds = _family_bindings(cfg)
    ts = np.linspace(-1.0, 1.5, 24) if ts is None else np.asarray(ts, dtype=float)
    vals = []
    for t in ts:
        pmap = {"x": 0.0, "t": float(t)}
        B = ex.evaluate(profile, pmap, binds)
        Bp = ex.evaluate(prof_d, pmap, binds)
        vals.append(Bp * Bp - cfg.c * B * B)
    return constancy_residual(vals)


# ---------------------------------------------------------------------------
# Compatibility residuals (any pair on a common chart)

def geodesic_compatibility_residual(
    conn_spec: geo.MetricSpec, image_spec: geo.MetricSpec, psi: PsiField, point
) -> float:
    """Max-abs residual of ∇_k ḡ_ij = 2ψ_k ḡ_ij + ψ_i ḡ_jk + ψ_j ḡ_ik."""
    geo.require_admissible(conn_spec, point)
    lhs = geo.covariant_derivative_02(conn_spec, image_spec.components, point)
    gbar = geo.frame(image_spec, point).g
    pv = psi.values(point)
    rhs = (
        2.0 * np.einsum("k,ij->kij", pv, gbar)
        + np.einsum("i,jk->kij", pv, gbar)
        + np.einsum("j,ik->kij", pv, gbar)
    )
    return max_abs_residual(lhs, rhs)


def christoffel_shift_residual(
    g_spec: geo.MetricSpec, gbar_spec: geo.MetricSpec, psi: PsiField, point
) -> float:
    """Γ̄^h_ij - Γ^h_ij - δ^h_i ψ_j - δ^h_j ψ_i, max-abs normalized."""
    gam = geo.frame(g_spec, point).gamma
    gam_bar = geo.frame(gbar_spec, point).gamma
    pv = psi.values(point)
    n = len(pv)
    eye = np.eye(n)
    shift = np.einsum("hi,j->hij", eye, pv) + np.einsum("hj,i->hij", eye, pv)
    return max_abs_residual(gam_bar, gam + shift)


def pair_christoffel_closed_forms(pair: GeodesicPair2D, point) -> dict[str, float]:
    """Closed forms of the image connection on a surface pair.

    Γ̄¹₁₁ = 𝔞'/2𝔞 - q𝔟'/(1+q𝔟), Γ̄²₁₂ = 𝔟'/(2𝔟(1+q𝔟)), Γ̄¹₂₂ = -𝔟'/2𝔞.
    """
    gam_bar = geo.frame(pair.image, point).gamma
    src = pair.source
    pmap = src.point_map(point)
    a = ex.evaluate(src.components[0][0], pmap, src.bindings)
    b = ex.evaluate(src.components[1][1], pmap, src.bindings)
    ap = ex.evaluate(ex.diff(src.components[0][0], src.coords[0]), pmap, src.bindings)
    bp = ex.evaluate(ex.diff(src.components[1][1], src.coords[0]), pmap, src.bindings)
    q = pair.map_shift
    opq = 1.0 + q * b
    return {
        "gbar_111": scalar_residual(gam_bar[0, 0, 0], ap / (2 * a) - q * bp / opq),
        "gbar_212": scalar_residual(gam_bar[1, 0, 1], bp / (2 * b * opq)),
        "gbar_122": scalar_residual(gam_bar[0, 1, 1], -bp / (2 * a)),
    }


def ricci_shift_residual(
    g_spec: geo.MetricSpec, gbar_spec: geo.MetricSpec, psi: PsiField, point
) -> float:
    """S̄_ij = S_ij - (n-1) ψ_ij with ψ_ij built from the g connection."""
    n = g_spec.dim
    s = geo.frame(g_spec, point).ricci
    s_bar = geo.frame(gbar_spec, point).ricci
    psi2 = psi.second_form(g_spec, point)
    return max_abs_residual(s_bar, s - (n - 1) * psi2)


# ---------------------------------------------------------------------------
# Family closed forms

def family_psi_closed_forms(fam: Family, point) -> dict[str, float]:
    """ψ_ij block closed forms for the family, against (psiij) directly."""
    cfg = fam.cfg
    v = _family_values(fam, tuple(float(u) for u in point))
    q, b, bp, B = cfg.map_shift, v["b"], v["bp"], v["B"]
    opq, shape = v["one_plus_qb"], v["shape"]
    psi2 = fam.psi.second_form(fam.source.product, point)
    p_dim = 2
    want11 = (
        q * bp * bp * (4 * cfg.c - q * cfg.d * b * b - 2 * cfg.d * b)
        / (4 * b * opq * opq * shape)
    )
    want22 = -q * b * shape / (4 * opq)
    fiber_g = geo.frame(fam.source.fiber, fam.source.split(point)[1]).g
    want_fiber = -q * b * B * B * shape / (4 * opq) * fiber_g
    return {
        "psi_11": scalar_residual(psi2[0, 0], want11),
        "psi_22": scalar_residual(psi2[1, 1], want22),
        "psi_fiber": max_abs_residual(psi2[p_dim:, p_dim:], want_fiber),
        "psi_off": zero_residual(psi2[0, 1], psi2)
        + zero_residual(psi2[:p_dim, p_dim:], psi2),
    }


def family_image_ricci_forms(fam: Family, point) -> dict[str, float]:
    """Barred Ricci and T closed forms against the image geometry."""
    cfg = fam.cfg
    n = cfg.n
    p, q = cfg.map_scale, cfg.map_shift
    v = _family_values(fam, tuple(float(u) for u in point))
    b, B = v["b"], v["B"]
    Bp = v["Bp"]
    opq = v["one_plus_qb"]
    coef = cfg.d + 4.0 * q * cfg.c

    iframe = geo.frame(fam.image.product, point)
    s_bar, g_bar = iframe.ricci, iframe.g
    two = 2
    out = {
        "ricci_base_bar": max_abs_residual(
            s_bar[:two, :two], -(n - 1) / (4.0 * p) * coef * g_bar[:two, :two]
        ),
        "ricci_mixed_bar": zero_residual(s_bar[:two, two:], s_bar),
    }
    salfa = (
        cfg.fiber_scalar / (n - 2)
        + (n - 3) * (cfg.c * B * B - Bp * Bp)
        - (n - 1) / 4.0 * b * B * B * coef / opq
    ) / v["Fbar"]
    out["ricci_fiber_bar"] = max_abs_residual(
        s_bar[two:, two:], salfa * g_bar[two:, two:]
    )
    d_bar = wp.diagnostics(fam.image, point)
    base_bar_frame = geo.frame(fam.image.base, fam.image.split(point)[0])
    out["t_bar"] = max_abs_residual(
        d_bar.t, coef / (2.0 * p) * d_bar.f_value * base_bar_frame.g
    )
    out["image_base_scalar"] = scalar_residual(
        base_bar_frame.scalar, -coef / (2.0 * p)
    )
    return out


def warp_compatibility_residuals(fam: Family, point) -> tuple[float, float]:
    """The two equations that make the warp pair geodesically compatible.

    scale equation: -(F̄/2F) F_a + (1/2) F^c ḡ_ca = F̄ ψ_a
    log equation:   d_a log(F̄/F) = 2 ψ_a
    Returns (scale residual, log residual), max-abs normalized.
    """
    base_pt = fam.source.split(point)[0]
    coords2 = fam.source.base.coords
    binds = _family_bindings(fam.cfg)
    F, Fbar = fam.source.warp, fam.image.warp
    pmap = dict(zip(coords2, base_pt))
    Fv = ex.evaluate(F, pmap, binds)
    Fbv = ex.evaluate(Fbar, pmap, binds)
    grad = np.array([ex.evaluate(ex.diff(F, c), pmap, binds) for c in coords2])
    grad_bar = np.array([ex.evaluate(ex.diff(Fbar, c), pmap, binds) for c in coords2])
    bframe = geo.frame(fam.source.base, base_pt)
    gbar_base = geo.frame(fam.image.base, base_pt).g
    psi_v = fam.psi.values(point)[:2]

    f_up = bframe.ginv @ grad
    lhs_scale = -(Fbv / (2.0 * Fv)) * grad + 0.5 * (gbar_base @ f_up)
    rhs_scale = Fbv * psi_v
    res_scale = max_abs_residual(lhs_scale, rhs_scale)

    lhs_log = grad_bar / Fbv - grad / Fv
    res_log = max_abs_residual(lhs_log, 2.0 * psi_v)
    return res_scale, res_log


def base_gauss_values(fam: Family, point) -> tuple[float, float]:
    """(source, image) base Gauss curvatures at the base point."""
    base_pt = fam.source.split(point)[0]
    return (
        geo.gauss_curvature(fam.source.base, base_pt),
        geo.gauss_curvature(fam.image.base, base_pt),
    )


# ---------------------------------------------------------------------------
# Factor relations across the pair

def factor_relations(
    fam: Family,
    point,
    source_fit: RoterFit | None = None,
    image_fit: RoterFit | None = None,
) -> dict[str, float]:
    """Scalar and tensor relations tying the two members together.

    Keys:
      l_r_value, l_r_image_value   fitted L_R against -D/4, -(D+4qC)/(4p)
      lkappa                       L_R - κ/(n(n-1)) = (p/(1+q𝔟)) (image)
      lcr_source, lcr_image        ((n-2)^2/n) L_C = L_R - κ/(n(n-1))
      lc_ratio                     L_C = (p/(1+q𝔟)) L_C_image
      l_source, l_image            L = -(n-2) L_R
      cor42_source, cor42_image    R.R = Q(S,R) - (n-2) L_R Q(g,C)
    """
    n = fam.cfg.n
    sframe = geo.frame(fam.source.product, point)
    iframe = geo.frame(fam.image.product, point)
    sfit = source_fit or fit_roter(sframe)
    ifit = image_fit or fit_roter(iframe)
    v = _family_values(fam, tuple(float(u) for u in point))
    ratio = fam.cfg.map_scale / v["one_plus_qb"]  # = F̄/F

    out = {
        "l_r_value": scalar_residual(sfit.L_R, fam.l_r_expected),
        "l_r_image_value": scalar_residual(ifit.L_R, fam.l_r_image_expected),
        "lkappa": scalar_residual(
            sfit.L_R - sframe.scalar / (n * (n - 1)),
            ratio * (ifit.L_R - iframe.scalar / (n * (n - 1))),
        ),
        "lcr_source": scalar_residual(
            (n - 2) ** 2 / n * sfit.L_C, sfit.L_R - sframe.scalar / (n * (n - 1))
        ),
        "lcr_image": scalar_residual(
            (n - 2) ** 2 / n * ifit.L_C, ifit.L_R - iframe.scalar / (n * (n - 1))
        ),
        "lc_ratio": scalar_residual(sfit.L_C, ratio * ifit.L_C),
        "l_source": scalar_residual(sfit.L, -(n - 2) * sfit.L_R),
        "l_image": scalar_residual(ifit.L, -(n - 2) * ifit.L_R),
    }
    for tag, frame, fit in (("cor42_source", sframe, sfit), ("cor42_image", iframe, ifit)):
        RR = derivation_apply(frame.riemann, frame.riemann, frame.ginv)
        QSR = tachibana(frame.ricci, frame.riemann)
        QgC = tachibana(frame.g, frame.weyl)
        out[tag] = tensor_residual(RR, QSR - (n - 2) * fit.L_R * QgC)
    return out


def psi_ricci_identity_residual(
    fam: Family,
    point,
    image_fit: RoterFit | None = None,
    phi_scale: float = 1.0,
) -> float:
    """The (0,2) identity tying ψ_ij to the image decomposition.

    (κ̄φ̄ + nμ̄) B - (tr(B)φ̄ + tr(ψ)μ̄) S̄ + (κ̄μ̄ - n(L̄_R - η̄)) ψ
      + (tr(ψ)(L̄_R - η̄) - tr(B)μ̄) ḡ = 0,

    with B_mk = ψ_mr S̄^r_k; the index is raised and both traces taken
    with ḡ (reported convention).  Requires the source to be
    pseudosymmetric but not semisymmetric (R.R must not vanish).
    phi_scale perturbs φ̄ for sensitivity controls.
    """
    n = fam.cfg.n
    sframe = geo.frame(fam.source.product, point)
    RR = derivation_apply(sframe.riemann, sframe.riemann, sframe.ginv)
    if np.max(np.abs(RR)) <= 1e-9 * (np.max(np.abs(sframe.riemann)) + 1.0):
        raise FamilyError("SEMISYMMETRIC", "source has R.R = 0; identity needs R.R != 0")
    iframe = geo.frame(fam.image.product, point)
    ifit = image_fit or fit_roter(iframe)
    phi_b = ifit.phi * phi_scale
    mu_b, eta_b, lr_b = ifit.mu, ifit.eta, ifit.L_R
    kappa_b = iframe.scalar
    gbar_inv = iframe.ginv
    psi2 = fam.psi.second_form(fam.source.product, point)
    Bmk = psi2 @ gbar_inv @ iframe.ricci
    tr_b = float(np.einsum("mk,mk->", gbar_inv, Bmk))
    tr_psi = float(np.einsum("mk,mk->", gbar_inv, psi2))
    terms = [
        (kappa_b * phi_b + n * mu_b) * Bmk,
        -(tr_b * phi_b + tr_psi * mu_b) * iframe.ricci,
        (kappa_b * mu_b - n * (lr_b - eta_b)) * psi2,
        (tr_psi * (lr_b - eta_b) - tr_b * mu_b) * iframe.g,
    ]
    total = sum(terms)
    scale = sum(float(np.linalg.norm(t)) for t in terms) + 1.0
    return float(np.linalg.norm(total)) / scale


def warp_profile_pde_residuals(fam: Family, point) -> dict[str, float]:
    """Shape constraints that make T proportional to the base metric.

    T₁₂ = 0 and 𝔟 T₁₁ = 𝔞 T₂₂, plus the square-root-warp reductions
    f₁₂ = f₂ 𝔟'/(2𝔟) and f₁₁ - (𝔞/𝔟) f₂₂ = f₁ (𝔞𝔟)'/(2𝔞𝔟) for f = √F.
    """
    d = wp.diagnostics(fam.source, point)
    base_pt = fam.source.split(point)[0]
    bframe = geo.frame(fam.source.base, base_pt)
    a_v, b_v = bframe.g[0, 0], bframe.g[1, 1]
    out = {
        "t_offdiag": zero_residual(d.t[0, 1], d.t),
        "t_balance": scalar_residual(b_v * d.t[0, 0], a_v * d.t[1, 1]),
    }
    binds = _family_bindings(fam.cfg)
    coords2 = fam.source.base.coords
    f_expr = ex.fn("sqrt", fam.source.warp)
    pmap = dict(zip(coords2, base_pt))
    f1 = ex.diff(f_expr, coords2[0])
    f2 = ex.diff(f_expr, coords2[1])
    f12 = ex.diff(f1, coords2[1])
    f11 = ex.diff(f1, coords2[0])
    f22 = ex.diff(f2, coords2[1])
    val = lambda e: ex.evaluate(e, pmap, binds)
    a_e, b_e = fam.source.base.components[0][0], fam.source.base.components[1][1]
    ab = ex.mul(a_e, b_e)
    ab_p = val(ex.diff(ab, coords2[0]))
    bp = val(ex.diff(b_e, coords2[0]))
    out["warp_root_mixed"] = scalar_residual(val(f12), val(f2) * bp / (2 * b_v))
    out["warp_root_balance"] = scalar_residual(
        val(f11) - (a_v / b_v) * val(f22), val(f1) * ab_p / (2 * a_v * b_v)
    )
    return out

"""Algebraic curvature operators at a point.

Dense numpy kernels for the (0,4)/(0,6) machinery used by every
identity check: the unit curvature tensor G of a metric, the
Kulkarni-Nomizu product of two symmetric (0,2) tensors, the derivation
B . T induced by a generalized curvature tensor, the Tachibana tensor
Q(A,T), least-squares proportionality-factor extraction and numerical
rank of shifted Ricci tensors.

Component arrays are indexed in direct slot order, T[a,b,c,d] =
T(e_a, e_b, e_c, e_d).  For tensors with the curvature pair symmetries
this coincides with the classical index layout (full index reversal is
the identity on such tensors), so block formulas stated in classical
index form can be read off the same arrays.

Symmetry is verified where declared, never exploited for storage; at
chart dimensions <= 8 dense arrays are trivially cheap and correctness
wins.  All functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tensor",
    "ProportionalityResult",
    "unit_curvature",
    "kulkarni_nomizu",
    "derivation_apply",
    "tachibana",
    "proportionality",
    "rank_shift",
    "tensor_residual",
    "scalar_residual",
    "max_abs_residual",
    "zero_residual",
    "constancy_residual",
    "riemann_symmetry_residuals",
    "trace_residual",
]

# Declared symmetry classes for Tensor.
SYMMETRY_CLASSES = ("none", "sym2", "riemann", "derivation-image")


@dataclass(frozen=True)
class Tensor:
    """Dense (0,k) tensor at a point with a declared symmetry class.

    The class is a claim that `validate` can check, not a storage
    optimization.  `derivation-image` marks (0,k+2) outputs of B . T or
    Q(A,T), which are antisymmetric in their last two slots.
    """

    data: np.ndarray
    symmetry: str = "none"

    def __post_init__(self):
        if self.symmetry not in SYMMETRY_CLASSES:
            raise ValueError(f"unknown symmetry class {self.symmetry!r}")
        shape = self.data.shape
        if len(set(shape)) > 1:
            raise ValueError(f"tensor axes must share one dimension, got {shape}")

    @property
    def dim(self) -> int:
        return self.data.shape[0] if self.data.ndim else 0

    @property
    def order(self) -> int:
        return self.data.ndim

    def validate(self, tol: float = 1e-9) -> None:
        """Raise ValueError if a declared symmetry residual exceeds tol."""
        a = self.data
        if self.symmetry == "sym2":
            bad = max_abs_residual(a, a.T)
            if bad > tol:
                raise ValueError(f"sym2 violated: residual {bad:.3e}")
        elif self.symmetry == "riemann":
            for name, res in riemann_symmetry_residuals(a).items():
                if res > tol:
                    raise ValueError(f"{name} violated: residual {res:.3e}")
        elif self.symmetry == "derivation-image":
            swapped = np.swapaxes(a, -1, -2)
            bad = max_abs_residual(a, -swapped)
            if bad > tol:
                raise ValueError(f"last-pair antisymmetry violated: residual {bad:.3e}")


def _asarray(t) -> np.ndarray:
    return t.data if isinstance(t, Tensor) else np.asarray(t, dtype=float)


# ---------------------------------------------------------------------------
# Residual conventions.  Tensor and scalar residuals are normalized by
# (|lhs| + |rhs| + 1): relative for O(1)-or-larger quantities, absolute
# near zero, and never spuriously large when both sides vanish.

def tensor_residual(lhs, rhs) -> float:
    """Frobenius residual of lhs == rhs, sum-plus-one normalized."""
    a, b = _asarray(lhs), _asarray(rhs)
    return float(np.linalg.norm(a - b) / (np.linalg.norm(a) + np.linalg.norm(b) + 1.0))


def scalar_residual(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1.0)


def max_abs_residual(lhs, rhs) -> float:
    """Componentwise max-abs residual, sum-plus-one normalized."""
    a, b = _asarray(lhs), _asarray(rhs)
    denom = float(np.max(np.abs(a)) + np.max(np.abs(b)) + 1.0)
    return float(np.max(np.abs(a - b)) / denom)


def zero_residual(t, reference=None) -> float:
    """Max-abs of t, normalized by the scale of a reference tensor."""
    a = _asarray(t)
    scale = 1.0 if reference is None else float(np.max(np.abs(_asarray(reference))) + 1.0)
    return float(np.max(np.abs(a)) / scale)


def constancy_residual(values) -> float:
    """Standard deviation of a sample, normalized by (1 + |mean|)."""
    v = np.asarray(values, dtype=float)
    return float(np.std(v) / (1.0 + abs(float(np.mean(v)))))


# ---------------------------------------------------------------------------
# Products

def unit_curvature(g: np.ndarray) -> np.ndarray:
    """G[a,b,c,d] = g_bc g_ad - g_ac g_bd; satisfies g^g = 2G."""
    g = _asarray(g)
    return np.einsum("ad,bc->abcd", g, g) - np.einsum("ac,bd->abcd", g, g)


def kulkarni_nomizu(A, B) -> np.ndarray:
    """Kulkarni-Nomizu product of symmetric (0,2) tensors.

    (A^B)[a,b,c,d] = A_ad B_bc + A_bc B_ad - A_ac B_bd - A_bd B_ac.
    The result carries the full curvature symmetries.
    """
    A, B = _asarray(A), _asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return (
        np.einsum("ad,bc->abcd", A, B)
        + np.einsum("bc,ad->abcd", A, B)
        - np.einsum("ac,bd->abcd", A, B)
        - np.einsum("bd,ac->abcd", A, B)
    )


def _endomorphism(B4: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    # E[x,y,i,s]: component s of the skew endomorphism applied to e_i,
    # recovered from the (0,4) tensor by raising the last slot.
    return np.einsum("xyid,sd->xyis", B4, ginv)


def derivation_apply(B4, T, ginv) -> np.ndarray:
    """Apply the derivation induced by a generalized curvature tensor.

    Given the (0,4) tensor B of a skew-symmetric endomorphism field and
    a (0,k) tensor T, returns the (0,k+2) tensor (B . T) with the two
    derivation slots appended last.  Instantiates R.R, R.S, R.C, C.C,
    C.R and C.S.
    """
    B4, T, ginv = _asarray(B4), _asarray(T), _asarray(ginv)
    if B4.shape[0] != T.shape[0]:
        raise ValueError(f"dimension mismatch: {B4.shape} vs {T.shape}")
    E = _endomorphism(B4, ginv)
    if T.ndim == 2:
        return -np.einsum("xyis,sj->ijxy", E, T) - np.einsum("xyjs,is->ijxy", E, T)
    if T.ndim == 4:
        return (
            -np.einsum("xyas,sbcd->abcdxy", E, T)
            - np.einsum("xybs,ascd->abcdxy", E, T)
            - np.einsum("xycs,absd->abcdxy", E, T)
            - np.einsum("xyds,abcs->abcdxy", E, T)
        )
    raise ValueError(f"unsupported tensor order {T.ndim}")


def tachibana(A, T) -> np.ndarray:
    """Tachibana tensor Q(A,T) of a symmetric (0,2) tensor A and (0,k) T.

    The image of T under the derivation induced by the metric-free
    wedge endomorphism of A; Q(g,G) vanishes identically.
    """
    A, T = _asarray(A), _asarray(T)
    if A.shape[0] != T.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {T.shape}")
    if T.ndim == 2:
        return (
            -np.einsum("yi,xj->ijxy", A, T)
            + np.einsum("xi,yj->ijxy", A, T)
            - np.einsum("yj,ix->ijxy", A, T)
            + np.einsum("xj,iy->ijxy", A, T)
        )
    if T.ndim == 4:
        return (
            -np.einsum("ya,xbcd->abcdxy", A, T)
            + np.einsum("xa,ybcd->abcdxy", A, T)
            - np.einsum("yb,axcd->abcdxy", A, T)
            + np.einsum("xb,aycd->abcdxy", A, T)
            - np.einsum("yc,abxd->abcdxy", A, T)
            + np.einsum("xc,abyd->abcdxy", A, T)
            - np.einsum("yd,abcx->abcdxy", A, T)
            + np.einsum("xd,abcy->abcdxy", A, T)
        )
    raise ValueError(f"unsupported tensor order {T.ndim}")


# ---------------------------------------------------------------------------
# Factor extraction and rank

@dataclass(frozen=True)
class ProportionalityResult:
    """Outcome of fitting LHS = factor * RHS in the Frobenius sense.

    verdict is "fit" when RHS carries signal, "vacuous" when both sides
    vanish, "inconsistent" when RHS vanishes but LHS does not.
    """

    factor: float | None
    residual: float
    degenerate: bool
    verdict: str


def proportionality(lhs, rhs) -> ProportionalityResult:
    """Least-squares factor between equally shaped tensors.

    factor = <lhs, rhs> / <rhs, rhs>; the residual uses the same
    sum-plus-one normalization as tensor_residual.  RHS is degenerate
    when its Frobenius norm is below 1e-12 * dim**2.
    """
    a, b = _asarray(lhs), _asarray(rhs)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    dim = a.shape[0] if a.ndim else 1
    if nb <= 1e-12 * dim * dim:
        if na <= 1e-12 * dim * dim:
            return ProportionalityResult(None, 0.0, True, "vacuous")
        return ProportionalityResult(None, na / (na + nb + 1.0), True, "inconsistent")
    factor = float(np.vdot(b, a) / np.vdot(b, b))
    residual = float(np.linalg.norm(a - factor * b) / (na + nb + 1.0))
    return ProportionalityResult(factor, residual, False, "fit")


def rank_shift(S, g, alpha: float) -> int:
    """Numerical rank of S - alpha*g via singular values.

    Threshold 1e-9 * sigma_max; an exactly zero matrix has rank 0.
    """
    M = _asarray(S) - float(alpha) * _asarray(g)
    sigma = np.linalg.svd(M, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > 1e-9 * sigma[0]))


# ---------------------------------------------------------------------------
# Symmetry suites

def riemann_symmetry_residuals(R) -> dict[str, float]:
    """Max-abs residuals of the algebraic curvature symmetries.

    Keys: skew_first_pair, skew_last_pair, pair_exchange, first_cyclic.
    Each is normalized by (max|R| + 1).
    """
    R = _asarray(R)
    scale = float(np.max(np.abs(R)) + 1.0)
    out = {
        "skew_first_pair": float(np.max(np.abs(R + np.swapaxes(R, 0, 1)))) / scale,
        "skew_last_pair": float(np.max(np.abs(R + np.swapaxes(R, 2, 3)))) / scale,
        "pair_exchange": float(np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1))))) / scale,
        "first_cyclic": float(
            np.max(np.abs(R + np.transpose(R, (2, 0, 1, 3)) + np.transpose(R, (1, 2, 0, 3))))
        )
        / scale,
    }
    return out


def trace_residual(C, ginv) -> float:
    """Largest metric trace of a (0,4) tensor over all slot pairs.

    Zero (to tolerance) exactly when the tensor is totally trace-free,
    as the Weyl tensor must be.  Normalized by (max|C| + 1).
    """
    C, ginv = _asarray(C), _asarray(ginv)
    scale = float(np.max(np.abs(C)) + 1.0)
    pairs = [
        ("ab,abcd->cd", None),
        ("ac,abcd->bd", None),
        ("ad,abcd->bc", None),
        ("bc,abcd->ad", None),
        ("bd,abcd->ac", None),
        ("cd,abcd->ab", None),
    ]
    worst = 0.0
    for subs, _ in pairs:
        tr = np.einsum(subs, ginv, C)
        worst = max(worst, float(np.max(np.abs(tr))))
    return worst / scale

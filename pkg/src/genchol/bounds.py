"""Perturbation bounds for the signed Cholesky factor, with scaling search.

Two families are computed.  The normwise family bounds ||dL||_F in terms of
||dK||_F, ||L^-1||_2 and condition numbers of column-rescaled factors; the
componentwise family bounds the factor error when |dK| <= eps |L~| |L~^T|,
the shape of the factorization algorithm's backward rounding error.  Each
bound is guarded by an explicit applicability condition, checked strictly;
infima over positive diagonal scalings are approximated by a small labelled
candidate set and the winning label is always reported so tightness is
auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densela import (
    ConditionViolated,
    _require_lower_triangular,
    cond_bauer_skeel,
    fro_norm,
    gamma_k,
    kappa2,
    lower_tri_inverse,
    matmul,
    singular_values,
    spectral_norm,
    vec_norm2,
    UNIT_ROUNDOFF,
    format_float,
)

__all__ = [
    "SQRT2",
    "ScalingCandidateSet",
    "NormwiseBoundReport",
    "ComponentwiseBoundReport",
    "NormwiseEvaluator",
    "scaling_candidates",
    "check_condition_3_1",
    "bound_3_3",
    "bound_3_4",
    "bound_3_11_coeff",
    "bound_3_12",
    "bound_3_13",
    "bound_3_14",
    "bound_3_15",
    "bound_3_17",
    "eps_componentwise",
    "check_condition_4_2",
    "bound_4_3",
    "bound_4_4",
    "bound_4_9_coeff",
    "build_normwise_report",
    "build_componentwise_report",
    "report_to_json",
    "NEAR_BOUNDARY_EPS",
    "W_BOUND_MAX_ORDER",
]

SQRT2 = math.sqrt(2.0)
NEAR_BOUNDARY_EPS = 1e-15  # discriminant closer to zero than this gets flagged
W_BOUND_MAX_ORDER = 24  # operator-matrix bound is skipped for larger orders
_POSITIVE_FLOOR = 1e-300

EPS_CONVENTIONS = ("min-paper", "max-safe")


@dataclass(frozen=True)
class ScalingCandidateSet:
    """Labelled positive diagonal scalings; always contains "identity"."""

    labels: tuple[str, ...]
    diags: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("candidate set must be nonempty")
        if "identity" not in self.labels:
            raise ValueError('candidate set must contain "identity"')
        if len(self.labels) != len(self.diags):
            raise ValueError("labels and diagonals must be parallel")
        for d in self.diags:
            if np.any(d <= 0.0):
                raise ValueError("scaling diagonals must be strictly positive")

    def __iter__(self):
        return iter(zip(self.labels, self.diags))


def scaling_candidates(l_dense, purpose: str) -> ScalingCandidateSet:
    """Heuristic diagonal scalings approximating the infima in the bounds.

    "kappa_min": identity plus column equilibration of L (D_jj = ||L e_j||_2).
    "componentwise": additionally a row equilibration of |L^-1||L|
    (D_jj = 1 / max of row j).  All entries are clamped positive.
    """
    if purpose not in ("kappa_min", "componentwise"):
        raise ValueError(f"unknown purpose {purpose!r}")
    l = np.asarray(l_dense, dtype=np.float64)
    _require_lower_triangular(l)
    p = l.shape[0]
    labels = ["identity"]
    diags = [np.ones(p)]
    col_eq = np.array([max(vec_norm2(l[:, j]), _POSITIVE_FLOOR) for j in range(p)])
    labels.append("col-equilibrate-L")
    diags.append(col_eq)
    linv = lower_tri_inverse(l)  # raises on singular input
    if purpose == "componentwise":
        babs = matmul(np.abs(linv), np.abs(l))
        row_max = np.maximum(babs.max(axis=1), _POSITIVE_FLOOR)
        labels.append("row-equilibrate-bauer")
        diags.append(1.0 / row_max)
    return ScalingCandidateSet(tuple(labels), tuple(diags))


# --- shared scalar formulas --------------------------------------------------


def _kappa_scaled(l: np.ndarray, d: np.ndarray) -> float:
    s = singular_values(l * (1.0 / d)[None, :])
    return float(s[0] / s[-1])


def _min_kappa(l: np.ndarray, d_set: ScalingCandidateSet) -> tuple[float, str]:
    best = None
    best_label = None
    for label, d in d_set:
        k = _kappa_scaled(l, d)
        if best is None or k < best:
            best = k
            best_label = label
    return best, best_label


def _b33_value(linv2: float, kappa: float, dk_fro: float, x: float) -> float:
    return SQRT2 * linv2 * kappa * dk_fro / (SQRT2 - 1.0 + math.sqrt(1.0 - 2.0 * x))


def _b34_value(linv2: float, kappa: float, dk_fro: float) -> float:
    return (2.0 + SQRT2) * (linv2 * kappa * dk_fro)


def _b312_style_value(linv2: float, kappa: float, dk_fro: float, xx: float) -> float:
    return SQRT2 * linv2 * kappa * dk_fro / (1.0 + math.sqrt(1.0 - 2.0 * xx))


def _b317_lhs(kappa_l: float, l2: float, dlinv2: float, dinv2: float, rel: float) -> float:
    return kappa_l * l2 * dlinv2 * dinv2 * rel


def _b317_value(l2: float, kappa_l: float, kappa_d: float, rel: float, lhs: float) -> float:
    return 2.0 * l2 * kappa_l * kappa_d * rel / (1.0 + math.sqrt(1.0 - 4.0 * lhs))


def _b43_value(factor: float, cbs_l: float, eps: float, t: float) -> float:
    return SQRT2 * factor * cbs_l * eps / (SQRT2 - 1.0 + math.sqrt(1.0 - 2.0 * t))


# --- standalone bound operations ----------------------------------------------


def check_condition_3_1(l_dense, dk_fro: float) -> bool:
    """Strict test ||L^-1||_2^2 ||dK||_F < 1/2."""
    linv2 = spectral_norm(lower_tri_inverse(l_dense))
    return linv2 * linv2 * dk_fro < 0.5


def bound_3_3(l_dense, dk_fro: float, d_set: ScalingCandidateSet) -> tuple[float, str]:
    """Rigorous normwise bound with scaling search; needs the strict 1/2 test."""
    l = np.asarray(l_dense, dtype=np.float64)
    linv2 = spectral_norm(lower_tri_inverse(l))
    x = linv2 * linv2 * dk_fro
    if not x < 0.5:
        raise ConditionViolated("3.1", f"||L^-1||_2^2 ||dK||_F = {x}")
    kappa, label = _min_kappa(l, d_set)
    return _b33_value(linv2, kappa, dk_fro, x), label


def bound_3_4(l_dense, dk_fro: float, d_set: ScalingCandidateSet) -> tuple[float, str]:
    """Weakened closed form of bound_3_3: (2 + sqrt(2)) times first order."""
    l = np.asarray(l_dense, dtype=np.float64)
    linv2 = spectral_norm(lower_tri_inverse(l))
    x = linv2 * linv2 * dk_fro
    if not x < 0.5:
        raise ConditionViolated("3.1", f"||L^-1||_2^2 ||dK||_F = {x}")
    kappa, label = _min_kappa(l, d_set)
    return _b34_value(linv2, kappa, dk_fro), label


def bound_3_11_coeff(l_dense, dk_fro: float, d_set: ScalingCandidateSet) -> float:
    """First-order coefficient times ||dK||_F (higher-order term dropped)."""
    l = np.asarray(l_dense, dtype=np.float64)
    linv2 = spectral_norm(lower_tri_inverse(l))
    kappa, _ = _min_kappa(l, d_set)
    return linv2 * kappa * dk_fro


def bound_3_12(l_dense, dk_fro: float) -> float:
    """Classic matrix-equation bound; its test uses the Frobenius norm of L^-1."""
    l = np.asarray(l_dense, dtype=np.float64)
    linv = lower_tri_inverse(l)
    linv2 = spectral_norm(linv)
    linv_f = fro_norm(linv)
    x_f = linv_f * linv_f * dk_fro
    if not x_f < 0.5:
        raise ConditionViolated("3.12-condition", f"||L^-1||_F^2 ||dK||_F = {x_f}")
    return _b312_style_value(linv2, kappa2(l), dk_fro, x_f)


def bound_3_13(l_dense, dk_fro: float) -> float:
    """Sharper variant of bound_3_12 with the spectral norm inside the root."""
    l = np.asarray(l_dense, dtype=np.float64)
    linv2 = spectral_norm(lower_tri_inverse(l))
    x = linv2 * linv2 * dk_fro
    if not x < 0.5:
        raise ConditionViolated("3.1", f"||L^-1||_2^2 ||dK||_F = {x}")
    return _b312_style_value(linv2, kappa2(l), dk_fro, x)


def bound_3_14(l_dense, dk_fro: float) -> float:
    """bound_3_3 evaluated with the identity scaling only."""
    l = np.asarray(l_dense, dtype=np.float64)
    linv2 = spectral_norm(lower_tri_inverse(l))
    x = linv2 * linv2 * dk_fro
    if not x < 0.5:
        raise ConditionViolated("3.1", f"||L^-1||_2^2 ||dK||_F = {x}")
    return _b33_value(linv2, kappa2(l), dk_fro, x)


def bound_3_15(w_inv_norm: float, dk_fro: float) -> float:
    """Operator-matrix bound 2 ||W^-1||_2 ||dK||_F; needs the strict 1/4 test."""
    lhs = w_inv_norm * w_inv_norm * dk_fro
    if not lhs < 0.25:
        raise ConditionViolated("3.16", f"||W^-1||_2^2 ||dK||_F = {lhs}")
    return 2.0 * w_inv_norm * dk_fro


def bound_3_17(
    l_dense, k, dk_fro: float, d_set: ScalingCandidateSet
) -> tuple[float, str, tuple[str, ...]]:
    """Refined matrix-equation bound; candidates failing its 1/4 test are excluded.

    Returns (value, winning label, excluded labels); raises when no candidate
    passes the condition.
    """
    l = np.asarray(l_dense, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    linv = lower_tri_inverse(l)
    sl = singular_values(l)
    l2, kappa_l = float(sl[0]), float(sl[0] / sl[-1])
    k2 = spectral_norm(k)
    rel = dk_fro / k2
    best = None
    best_label = None
    excluded = []
    for label, d in d_set:
        dlinv2 = spectral_norm(d[:, None] * linv)
        dinv2 = float(np.max(1.0 / d))
        lhs = _b317_lhs(kappa_l, l2, dlinv2, dinv2, rel)
        if not lhs < 0.25:
            excluded.append(label)
            continue
        value = _b317_value(l2, kappa_l, _kappa_scaled(l, d), rel, lhs)
        if best is None or value < best:
            best = value
            best_label = label
    if best is None:
        raise ConditionViolated("3.18", "no scaling candidate satisfies the 1/4 test")
    return best, best_label, tuple(excluded)


def eps_componentwise(
    m: int, n: int, u: float = UNIT_ROUNDOFF, convention: str = "max-safe"
) -> float:
    """Componentwise envelope size from the blockwise rounding-error constants.

    "min-paper" takes the smaller of the two block constants as printed;
    "max-safe" takes the larger, which dominates both blocks.
    """
    if convention not in EPS_CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    ga = gamma_k(3 * m + 1, u)
    gc = gamma_k(3 * n + 1, u)
    return min(ga, gc) if convention == "min-paper" else max(ga, gc)


def check_condition_4_2(l_tilde_dense, eps: float) -> bool:
    """Strict test cond_F(L~) cond_F(L~^-T) eps < 1/2."""
    lt = np.asarray(l_tilde_dense, dtype=np.float64)
    cbs_l = cond_bauer_skeel(lt)
    cbs_it = cond_bauer_skeel(lower_tri_inverse(lt).T)
    return cbs_l * cbs_it * eps < 0.5


def _componentwise_parts(lt: np.ndarray):
    _require_lower_triangular(lt)
    lt_inv = lower_tri_inverse(lt)
    babs = matmul(np.abs(lt_inv), np.abs(lt))
    cbs_l = fro_norm(babs)
    cbs_it = cond_bauer_skeel(lt_inv.T)
    return babs, cbs_l, cbs_it


def _min_componentwise_factor(
    lt: np.ndarray, babs: np.ndarray, d_set: ScalingCandidateSet
) -> tuple[float, str]:
    """min over D of ||L~ D^-1||_2 ||D |L~^-1||L~| ||_2."""
    best = None
    best_label = None
    for label, d in d_set:
        t1 = spectral_norm(lt * (1.0 / d)[None, :])
        t2 = spectral_norm(babs * d[:, None])
        val = t1 * t2
        if best is None or val < best:
            best = val
            best_label = label
    return best, best_label


def bound_4_3(l_tilde_dense, eps: float, d_set: ScalingCandidateSet) -> tuple[float, str]:
    """Rigorous componentwise bound with scaling search."""
    lt = np.asarray(l_tilde_dense, dtype=np.float64)
    babs, cbs_l, cbs_it = _componentwise_parts(lt)
    t = cbs_l * cbs_it * eps
    if not t < 0.5:
        raise ConditionViolated("4.2", f"cond_F(L~) cond_F(L~^-T) eps = {t}")
    factor, label = _min_componentwise_factor(lt, babs, d_set)
    return _b43_value(factor, cbs_l, eps, t), label


def bound_4_4(l_tilde_dense, eps: float, d_set: ScalingCandidateSet) -> float:
    """Weakened closed form: (2 + sqrt(2)) times the first-order coefficient."""
    lt = np.asarray(l_tilde_dense, dtype=np.float64)
    babs, cbs_l, cbs_it = _componentwise_parts(lt)
    t = cbs_l * cbs_it * eps
    if not t < 0.5:
        raise ConditionViolated("4.2", f"cond_F(L~) cond_F(L~^-T) eps = {t}")
    factor, _ = _min_componentwise_factor(lt, babs, d_set)
    return (2.0 + SQRT2) * (factor * cbs_l * eps)


def bound_4_9_coeff(l_tilde_dense, eps: float, d_set: ScalingCandidateSet) -> float:
    """First-order componentwise coefficient times eps."""
    lt = np.asarray(l_tilde_dense, dtype=np.float64)
    babs, cbs_l, _ = _componentwise_parts(lt)
    factor, _ = _min_componentwise_factor(lt, babs, d_set)
    return factor * cbs_l * eps


# --- reports ------------------------------------------------------------------


@dataclass(frozen=True)
class NormwiseBoundReport:
    """All normwise bound values with their applicability flags.

    A bound field is None exactly when its condition flag is false (or, for
    b_3_15, when the operator-matrix norm was not supplied).
    """

    dk_fro: float
    linv_2: float
    cond_3_1_ok: bool
    cond_3_12_ok: bool
    cond_3_16_ok: bool | None
    cond_3_18_ok: bool
    b_3_3: float | None
    b_3_3_label: str | None
    b_3_4: float | None
    b_3_4_label: str | None
    b_3_11_coeff: float
    b_3_12: float | None
    b_3_13: float | None
    b_3_14: float | None
    b_3_15: float | None
    b_3_17: float | None
    b_3_17_label: str | None
    b_3_17_excluded: str
    near_boundary: str
    actual_dl_fro: float | None
    actual_dl_2: float | None

    FIELD_ORDER = (
        "dk_fro", "linv_2", "cond_3_1_ok", "cond_3_12_ok", "cond_3_16_ok",
        "cond_3_18_ok", "b_3_3", "b_3_3_label", "b_3_4", "b_3_4_label",
        "b_3_11_coeff", "b_3_12", "b_3_13", "b_3_14", "b_3_15", "b_3_17",
        "b_3_17_label", "b_3_17_excluded", "near_boundary", "actual_dl_fro",
        "actual_dl_2",
    )

    def rigorous_bounds(self) -> dict[str, float]:
        """Present rigorous bounds by name (first-order coefficient excluded)."""
        out = {}
        for name in ("b_3_3", "b_3_4", "b_3_12", "b_3_13", "b_3_14", "b_3_15", "b_3_17"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


@dataclass(frozen=True)
class ComponentwiseBoundReport:
    """Componentwise bound values for a computed factor."""

    eps: float
    eps_convention: str
    cond_4_2_ok: bool
    b_4_3: float | None
    b_4_3_label: str | None
    b_4_4: float | None
    b_4_9_coeff: float
    cond_bs_L: float
    cond_bs_LinvT: float
    near_boundary: str
    actual_dl_fro: float | None
    actual_dl_2: float | None

    FIELD_ORDER = (
        "eps", "eps_convention", "cond_4_2_ok", "b_4_3", "b_4_3_label", "b_4_4",
        "b_4_9_coeff", "cond_bs_L", "cond_bs_LinvT", "near_boundary",
        "actual_dl_fro", "actual_dl_2",
    )

    def rigorous_bounds(self) -> dict[str, float]:
        out = {}
        for name in ("b_4_3", "b_4_4"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


class NormwiseEvaluator:
    """Per-factor cache of everything the normwise bounds need except ||dK||_F.

    Campaigns evaluate many perturbation sizes against one factor; building
    the report through this object avoids re-running the SVD kernels.
    """

    def __init__(self, l_dense, k, w_inv_norm: float | None = None):
        l = np.asarray(l_dense, dtype=np.float64)
        k = np.asarray(k, dtype=np.float64)
        self.l = l
        self.linv = lower_tri_inverse(l)
        self.linv2 = spectral_norm(self.linv)
        self.linv_f = fro_norm(self.linv)
        sl = singular_values(l)
        self.l2 = float(sl[0])
        self.kappa_l = float(sl[0] / sl[-1])
        self.k2 = spectral_norm(k)
        self.w_inv_norm = w_inv_norm
        self.d_set = scaling_candidates(l, "kappa_min")
        self.kappas = {}
        self.dlinv2 = {}
        self.dinv2 = {}
        for label, d in self.d_set:
            self.kappas[label] = _kappa_scaled(l, d)
            self.dlinv2[label] = spectral_norm(d[:, None] * self.linv)
            self.dinv2[label] = float(np.max(1.0 / d))
        # first minimal candidate wins, so ties resolve deterministically
        self.kappa_label = min(self.kappas, key=self.kappas.get)
        self.kappa_min = self.kappas[self.kappa_label]

    def condition_318_strength_ok(self, dk_fro: float) -> bool:
        """True when the refined-bound test is at least as strong as the 1/2 test
        for every candidate (left side >= ||L^-1||_2^2 ||dK||_F)."""
        x = self.linv2 * self.linv2 * dk_fro
        rel = dk_fro / self.k2
        for label, _ in self.d_set:
            lhs = _b317_lhs(self.kappa_l, self.l2, self.dlinv2[label], self.dinv2[label], rel)
            if lhs < x:
                return False
        return True

    def report(self, dk_fro: float, actual_dl=None) -> NormwiseBoundReport:
        near = []
        x = self.linv2 * self.linv2 * dk_fro
        cond31 = x < 0.5
        x_f = self.linv_f * self.linv_f * dk_fro
        cond312 = x_f < 0.5

        b33 = b34 = b313 = b314 = None
        b33_label = b34_label = None
        if cond31:
            if 0.0 < 1.0 - 2.0 * x < NEAR_BOUNDARY_EPS:
                near.append("b_3_3")
            b33 = _b33_value(self.linv2, self.kappa_min, dk_fro, x)
            b33_label = self.kappa_label
            b34 = _b34_value(self.linv2, self.kappa_min, dk_fro)
            b34_label = self.kappa_label
            b313 = _b312_style_value(self.linv2, self.kappa_l, dk_fro, x)
            b314 = _b33_value(self.linv2, self.kappa_l, dk_fro, x)
        b311 = self.linv2 * self.kappa_min * dk_fro

        b312 = None
        if cond312:
            if 0.0 < 1.0 - 2.0 * x_f < NEAR_BOUNDARY_EPS:
                near.append("b_3_12")
            b312 = _b312_style_value(self.linv2, self.kappa_l, dk_fro, x_f)

        cond316: bool | None = None
        b315 = None
        if self.w_inv_norm is not None:
            cond316 = self.w_inv_norm * self.w_inv_norm * dk_fro < 0.25
            if cond316:
                b315 = 2.0 * self.w_inv_norm * dk_fro

        rel = dk_fro / self.k2
        best317 = None
        best317_label = None
        excluded = []
        for label, d in self.d_set:
            lhs = _b317_lhs(self.kappa_l, self.l2, self.dlinv2[label], self.dinv2[label], rel)
            if not lhs < 0.25:
                excluded.append(label)
                continue
            if 0.0 < 1.0 - 4.0 * lhs < NEAR_BOUNDARY_EPS and "b_3_17" not in near:
                near.append("b_3_17")
            value = _b317_value(self.l2, self.kappa_l, self.kappas[label], rel, lhs)
            if best317 is None or value < best317:
                best317 = value
                best317_label = label
        cond318 = best317 is not None

        actual_f = actual_2 = None
        if actual_dl is not None:
            actual_f = fro_norm(actual_dl)
            actual_2 = spectral_norm(actual_dl)

        return NormwiseBoundReport(
            dk_fro=dk_fro,
            linv_2=self.linv2,
            cond_3_1_ok=cond31,
            cond_3_12_ok=cond312,
            cond_3_16_ok=cond316,
            cond_3_18_ok=cond318,
            b_3_3=b33,
            b_3_3_label=b33_label,
            b_3_4=b34,
            b_3_4_label=b34_label,
            b_3_11_coeff=b311,
            b_3_12=b312,
            b_3_13=b313,
            b_3_14=b314,
            b_3_15=b315,
            b_3_17=best317,
            b_3_17_label=best317_label,
            b_3_17_excluded=",".join(excluded),
            near_boundary=",".join(near),
            actual_dl_fro=actual_f,
            actual_dl_2=actual_2,
        )


def build_normwise_report(
    l_dense,
    k,
    dk_fro: float,
    *,
    w_inv_norm: float | None = None,
    actual_dl=None,
) -> NormwiseBoundReport:
    """One-shot report: every normwise bound whose condition holds.

    ``w_inv_norm`` enables the operator-matrix bound; ``actual_dl`` (a dense
    factor difference) fills the ground-truth fields.
    """
    return NormwiseEvaluator(l_dense, k, w_inv_norm).report(dk_fro, actual_dl)


def build_componentwise_report(
    l_tilde_dense,
    eps: float,
    eps_convention: str = "max-safe",
    *,
    actual_dl=None,
) -> ComponentwiseBoundReport:
    """Evaluate the componentwise bounds for a computed factor."""
    if eps_convention not in EPS_CONVENTIONS:
        raise ValueError(f"unknown convention {eps_convention!r}")
    lt = np.asarray(l_tilde_dense, dtype=np.float64)
    babs, cbs_l, cbs_it = _componentwise_parts(lt)
    t = cbs_l * cbs_it * eps
    cond42 = t < 0.5
    near = []
    b43 = b44 = None
    b43_label = None
    d_set = scaling_candidates(lt, "componentwise")
    factor, label = _min_componentwise_factor(lt, babs, d_set)
    b49 = factor * cbs_l * eps
    if cond42:
        if 0.0 < 1.0 - 2.0 * t < NEAR_BOUNDARY_EPS:
            near.append("b_4_3")
        b43 = _b43_value(factor, cbs_l, eps, t)
        b43_label = label
        b44 = (2.0 + SQRT2) * (factor * cbs_l * eps)

    actual_f = actual_2 = None
    if actual_dl is not None:
        actual_f = fro_norm(actual_dl)
        actual_2 = spectral_norm(actual_dl)

    return ComponentwiseBoundReport(
        eps=eps,
        eps_convention=eps_convention,
        cond_4_2_ok=cond42,
        b_4_3=b43,
        b_4_3_label=b43_label,
        b_4_4=b44,
        b_4_9_coeff=b49,
        cond_bs_L=cbs_l,
        cond_bs_LinvT=cbs_it,
        near_boundary=",".join(near),
        actual_dl_fro=actual_f,
        actual_dl_2=actual_2,
    )


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize {type(v).__name__}")


def report_to_json(report) -> str:
    """Flat JSON object, field order fixed, floats at 17 significant digits."""
    parts = [
        f'"{name}": {_json_scalar(getattr(report, name))}'
        for name in report.FIELD_ORDER
    ]
    return "{" + ", ".join(parts) + "}"

"""Independent brute-force machinery used to check the bound layer.

Provides the half-vectorization pair (duvec for symmetric matrices, uvec for
lower-triangular ones), the operator matrix of the linearized perturbation map
X -> X J L^T + L J X^T built column by column from its definition, the
double-factorization ground truth for the factor perturbation, and a
compensated-arithmetic residual for backward-error experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densela import (
    ShapeError,
    SingularMatrixError,
    as_matrix,
    lower_tri_solve,
    matmul,
    spectral_norm,
)
from .factorization import (
    GenCholFactor,
    SaddleMatrix,
    assemble_k,
    factor_to_dense,
    factorize,
    factorize_dense,
)

__all__ = [
    "WOperator",
    "duvec",
    "uvec_lower",
    "unuvec",
    "halfvec_index",
    "build_w",
    "w_inverse_norm",
    "actual_delta_l",
    "compensated_residual",
]


def halfvec_index(i: int, j: int, p: int) -> int:
    """Position of entry (i, j), i >= j, in the column-stacked lower triangle."""
    if not 0 <= j <= i < p:
        raise IndexError(f"({i}, {j}) is not a lower-triangle position for order {p}")
    return j * p - j * (j - 1) // 2 + (i - j)


def duvec(s) -> np.ndarray:
    """Column-stacked lower triangle of an exactly symmetric matrix."""
    s = as_matrix(s)
    if s.shape[0] != s.shape[1]:
        raise ShapeError("duvec expects a square matrix")
    if not np.array_equal(s, s.T):
        raise ShapeError("duvec expects an exactly symmetric matrix")
    p = s.shape[0]
    return np.concatenate([s[j:, j] for j in range(p)]) if p else np.zeros(0)


def uvec_lower(x) -> np.ndarray:
    """Column-stacked lower triangle of a lower-triangular matrix."""
    x = as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise ShapeError("uvec_lower expects a square matrix")
    if x.shape[0] and np.any(np.triu(x, 1) != 0.0):
        raise ShapeError("uvec_lower expects a lower-triangular matrix")
    p = x.shape[0]
    return np.concatenate([x[j:, j] for j in range(p)]) if p else np.zeros(0)


def unuvec(h) -> np.ndarray:
    """Inverse of uvec_lower: rebuild the lower-triangular matrix."""
    h = np.asarray(h, dtype=np.float64).ravel()
    q = h.size
    p = int((np.sqrt(8.0 * q + 1.0) - 1.0) / 2.0 + 0.5)
    if p * (p + 1) // 2 != q:
        raise ShapeError(f"length {q} is not a triangular number")
    out = np.zeros((p, p))
    pos = 0
    for j in range(p):
        cnt = p - j
        out[j:, j] = h[pos : pos + cnt]
        pos += cnt
    return out


@dataclass(frozen=True)
class WOperator:
    """Dense matrix of the map X -> duvec(X J L^T + L J X^T) in uvec bases.

    Lower triangular of order p(p+1)/2 with nonzero diagonal whenever L is
    nonsingular.
    """

    order: int
    entries: np.ndarray


def build_w(factor: GenCholFactor) -> WOperator:
    """Apply the defining map to every lower-triangle basis element.

    Column for basis position (i, j) is duvec(E_ij J L^T + L J E_ij^T); no
    index formula is used, so the construction is correct by definition.
    """
    l = factor_to_dense(factor)
    p = factor.p
    jvec = factor.spec.signature()
    jlt = jvec[:, None] * l.T
    lj = l * jvec[None, :]
    q = p * (p + 1) // 2
    w = np.zeros((q, q))
    col = 0
    for j in range(p):
        for i in range(j, p):
            e = np.zeros((p, p))
            e[i, j] = 1.0
            y = matmul(e, jlt) + matmul(lj, e.T)
            w[:, col] = duvec(y)
            col += 1
    return WOperator(order=p, entries=w)


def w_inverse_norm(w: WOperator) -> float:
    """Spectral norm of W^-1 via forward substitution on the triangular W."""
    entries = np.asarray(w.entries, dtype=np.float64)
    q = entries.shape[0]
    if np.any(np.diagonal(entries) == 0.0):
        raise SingularMatrixError("operator matrix has a zero diagonal entry")
    winv = lower_tri_solve(entries, np.eye(q))
    return spectral_norm(winv)


def actual_delta_l(s: SaddleMatrix, dk) -> np.ndarray:
    """Ground-truth factor perturbation by double factorization.

    Returns factorize(K + dK) - factorize(K) as a dense lower-triangular
    matrix.  Breakdowns carry the label of the matrix that failed.
    """
    dk = as_matrix(dk)
    p = s.p
    if dk.shape != (p, p):
        raise ShapeError(f"perturbation must be {p} x {p}")
    if not np.array_equal(dk, dk.T):
        raise ShapeError("perturbation must be exactly symmetric")
    base = factorize(s)
    perturbed = factorize_dense(assemble_k(s) + dk, s.spec.m, s.spec.n, "K+dK")
    return factor_to_dense(perturbed) - factor_to_dense(base)


# --- compensated residual ---------------------------------------------------

_SPLITTER = 134217729.0  # 2**27 + 1, Veltkamp split constant


def _two_prod(a, b):
    x = a * b
    c = _SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    err = ((ah * bh - x) + ah * bl + al * bh) + al * bl
    return x, err


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def compensated_residual(factor: GenCholFactor, s: SaddleMatrix) -> np.ndarray:
    """L J L^T - K with every product and sum carried in error-free pairs.

    The result is the backward error of the factor, accurate to second order
    in the unit roundoff, and exactly zero when all products are representable.
    """
    if factor.spec != s.spec:
        raise ShapeError("factor and matrix have different block specs")
    l = factor_to_dense(factor)
    jvec = factor.spec.signature()
    k = assemble_k(s)
    p = factor.p
    acc = np.zeros((p, p))
    comp = np.zeros((p, p))
    for idx in range(p):
        u = l[:, idx] * jvec[idx]  # exact: signs only
        v = l[:, idx]
        prod, perr = _two_prod(u[:, None], v[None, :])
        acc, serr = _two_sum(acc, prod)
        comp += perr + serr
    acc, serr = _two_sum(acc, -k)
    comp += serr
    return acc + comp

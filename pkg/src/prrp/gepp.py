"""Gaussian elimination with partial pivoting.

Used three ways: as the baseline dense solver, as the finisher for the
b-by-b diagonal blocks of the panel factorizations, and as the selection
operator of the tournament-pivoted GEPP baseline.

Pivot rule: at step k the entry of largest magnitude in column k at or
below the diagonal wins; ties go to the smallest row index.  The running
maximum of the live trailing submatrix is sampled after every rank-1
update, which is what the growth factor is computed from.
"""

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DimensionMismatch, SingularMatrix


@dataclass
class GeppFactors:
    perm: np.ndarray      # row permutation, apply_row_perm(perm, a) == l @ u
    l: np.ndarray         # m x s unit lower trapezoidal, s = min(m, n)
    u: np.ndarray         # s x n upper trapezoidal
    intermediate_max: float
    original_max: float

    @property
    def growth_factor(self):
        if self.original_max == 0.0:
            raise ZeroDivisionError("growth factor of an all-zero matrix")
        return self.intermediate_max / self.original_max

    def solve(self, rhs):
        return gepp_solve(self, rhs)


def gepp_factor(a):
    """Factor an m x n matrix (any shape) with partial pivoting."""
    c = matcore.as_matrix(a).copy(order="F")
    m, n = c.shape
    steps = min(m, n)
    p = matcore.identity_perm(m)
    original_max = matcore.norm(c, "max")
    running_max = original_max
    for k in range(steps):
        col = np.abs(c[k:, k])
        rel = int(np.argmax(col))
        if col[rel] == 0.0:
            raise SingularMatrix(f"zero pivot column {k}", column=k)
        if rel:
            piv = k + rel
            c[[k, piv], :] = c[[piv, k], :]
            p[[k, piv]] = p[[piv, k]]
        if k + 1 < m:
            c[k + 1:, k] /= c[k, k]
            if k + 1 < n:
                c[k + 1:, k + 1:] -= c[k + 1:, k:k + 1] * c[k:k + 1, k + 1:]
                running_max = max(running_max, float(np.abs(c[k + 1:, k + 1:]).max()))
    l = np.tril(c[:, :steps], -1)
    np.fill_diagonal(l, 1.0)
    u = np.triu(c[:steps, :])
    return GeppFactors(perm=p, l=np.asfortranarray(l), u=np.asfortranarray(u),
                       intermediate_max=running_max, original_max=original_max)


def gepp_solve(f, b):
    """Solve A x = b given square GEPP factors of A."""
    if f.l.shape[0] != f.l.shape[1]:
        raise DimensionMismatch("gepp_solve needs factors of a square matrix")
    vec = np.asarray(b, dtype=np.float64)
    rhs = vec.reshape(-1, 1) if vec.ndim == 1 else vec
    if rhs.shape[0] != f.l.shape[0]:
        raise DimensionMismatch("right-hand side row count mismatch")
    y = matcore.trsm_lower_unit(f.l, matcore.apply_row_perm(f.perm, rhs))
    x = matcore.trsm_upper(f.u, y)
    return x[:, 0] if vec.ndim == 1 else x

"""Dense-matrix kernel layer: storage conventions, permutations, products,
triangular solves, norms, and the text format used by the CLI and fixtures.

Conventions frozen here and relied on everywhere else:

* Matrices are 2-D float64 ``numpy`` arrays held in column-major (Fortran)
  element order.
* ``matmul`` accumulates rank-1 terms in increasing ``k`` order (a single
  fixed k-loop, no blocking or reordering), so identical inputs give
  identical bits run to run.  Each rank-1 step is applied by the BLAS
  ``dger`` kernel, which has no internal reduction and is therefore
  order-stable.
* ``rank_update(c, a, b)`` is literally ``c - matmul(a, b)`` so the two
  share one summation order bit for bit.
* A permutation is an index vector ``p``; ``apply_row_perm(p, a)`` places
  row ``p[i]`` of the input in row ``i`` of the result (a pure row
  shuffle, no arithmetic).
* Triangular solves run in axpy form: once unknown ``i`` is final, its
  contribution is subtracted from all remaining rows at once.

Text format: first line ``rows cols``, then one line per row with
space-separated shortest round-trip decimal values.
"""

import io

import numpy as np
from scipy.linalg.blas import dger

from .errors import DimensionMismatch, SingularFactor


def as_matrix(a):
    """Coerce to a 2-D float64 Fortran-ordered array (copying if needed)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got ndim={m.ndim}")
    return np.asfortranarray(m)


def matmul(a, b):
    """c[i,j] = sum_k a[i,k] b[k,j], accumulated in increasing k order."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(
            f"matmul: inner dimensions differ ({a.shape} x {b.shape})")
    c = np.zeros((a.shape[0], b.shape[1]), order="F")
    for k in range(a.shape[1]):
        c = dger(1.0, a[:, k], b[k, :], a=c, overwrite_a=1)
    return c


def rank_update(c, a, b):
    """Return c - a.b with the same summation order as :func:`matmul`."""
    c = as_matrix(c)
    if c.shape[0] != a.shape[0] or c.shape[1] != b.shape[1]:
        raise DimensionMismatch(
            f"rank_update: result shape {c.shape} does not match product "
            f"{a.shape} x {b.shape}")
    return c - matmul(a, b)


def trsm_lower_unit(l, b):
    """Solve L X = B for unit-lower-triangular L (diagonal assumed 1)."""
    l = as_matrix(l)
    x = as_matrix(b).copy(order="F")
    n = l.shape[0]
    if l.shape[1] != n:
        raise DimensionMismatch("trsm_lower_unit: L must be square")
    if x.shape[0] != n:
        raise DimensionMismatch("trsm_lower_unit: B row count mismatch")
    for i in range(n - 1):
        x[i + 1:, :] -= l[i + 1:, i:i + 1] * x[i:i + 1, :]
    return x


def trsm_upper(u, b):
    """Solve U X = B for upper-triangular U by back substitution."""
    u = as_matrix(u)
    x = as_matrix(b).copy(order="F")
    n = u.shape[0]
    if u.shape[1] != n:
        raise DimensionMismatch("trsm_upper: U must be square")
    if x.shape[0] != n:
        raise DimensionMismatch("trsm_upper: B row count mismatch")
    for i in range(n - 1, -1, -1):
        d = u[i, i]
        if d == 0.0:
            raise SingularFactor(f"zero diagonal at index {i}", index=i)
        x[i, :] /= d
        if i:
            x[:i, :] -= u[:i, i:i + 1] * x[i:i + 1, :]
    return x


def trsm_upper_right(b, u):
    """Solve X U = B for upper-triangular U (right-hand solve)."""
    u = as_matrix(u)
    x = as_matrix(b).copy(order="F")
    n = u.shape[0]
    if u.shape[1] != n:
        raise DimensionMismatch("trsm_upper_right: U must be square")
    if x.shape[1] != n:
        raise DimensionMismatch("trsm_upper_right: B column count mismatch")
    for j in range(n):
        d = u[j, j]
        if d == 0.0:
            raise SingularFactor(f"zero diagonal at index {j}", index=j)
        x[:, j] /= d
        if j + 1 < n:
            x[:, j + 1:] -= x[:, j:j + 1] * u[j:j + 1, j + 1:]
    return x


def norm(a, kind):
    """Matrix norm: 'one' | 'inf' | 'fro' | 'max'.  Empty matrix gives 0."""
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return 0.0
    absa = np.abs(a)
    if kind == "one":
        return float(absa.sum(axis=0).max())
    if kind == "inf":
        return float(absa.sum(axis=1).max())
    if kind == "fro":
        return float(np.sqrt((a * a).sum()))
    if kind == "max":
        return float(absa.max())
    raise ValueError(f"unknown norm kind {kind!r}")


# -- permutations ------------------------------------------------------------

def identity_perm(n):
    return np.arange(n, dtype=np.intp)


def check_perm(p):
    p = np.asarray(p, dtype=np.intp)
    if p.ndim != 1:
        raise DimensionMismatch("permutation must be a 1-D index vector")
    seen = np.zeros(p.shape[0], dtype=bool)
    if p.size and (p.min() < 0 or p.max() >= p.shape[0]):
        raise DimensionMismatch("permutation entries out of range")
    seen[p] = True
    if not seen.all():
        raise DimensionMismatch("permutation map is not a bijection")
    return p


def apply_row_perm(p, a):
    """Row i of the result is row p[i] of the input (bit-preserving)."""
    p = check_perm(p)
    a = as_matrix(a)
    if p.shape[0] != a.shape[0]:
        raise DimensionMismatch(
            f"permutation length {p.shape[0]} != row count {a.shape[0]}")
    return np.asfortranarray(a[p, :])


def compose(p, q):
    """Permutation equal to applying p first, then q: (p then q)[i] = p[q[i]]."""
    p = check_perm(p)
    q = check_perm(q)
    if p.shape != q.shape:
        raise DimensionMismatch("compose: length mismatch")
    return p[q]


def invert(p):
    p = check_perm(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(p.shape[0], dtype=np.intp)
    return inv


def perm_to_matrix(p):
    """Dense 0/1 matrix P with P A == apply_row_perm(p, A).  Test oracle only."""
    p = check_perm(p)
    n = p.shape[0]
    mat = np.zeros((n, n), order="F")
    mat[np.arange(n), p] = 1.0
    return mat


# -- text format -------------------------------------------------------------

def write_matrix(f, a):
    """Write in the text format; ``f`` is a path or a writable text file."""
    a = as_matrix(a)
    if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
        with open(f, "w") as fh:
            write_matrix(fh, a)
        return
    f.write(f"{a.shape[0]} {a.shape[1]}\n")
    for i in range(a.shape[0]):
        f.write(" ".join(repr(float(v)) for v in a[i, :]))
        f.write("\n")


def read_matrix(f):
    """Parse the text format (full round trip of write_matrix)."""
    if isinstance(f, (str, bytes)) or hasattr(f, "__fspath__"):
        with open(f, "r") as fh:
            return read_matrix(fh)
    header = f.readline().split()
    if len(header) != 2:
        raise ValueError("matrix header must be 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if rows < 0 or cols < 0:
        raise ValueError("matrix dimensions must be nonnegative")
    a = np.zeros((rows, cols), order="F")
    for i in range(rows):
        parts = f.readline().split()
        if len(parts) != cols:
            raise ValueError(f"row {i}: expected {cols} values, got {len(parts)}")
        a[i, :] = [float(v) for v in parts]
    return a


def matrix_to_text(a):
    buf = io.StringIO()
    write_matrix(buf, a)
    return buf.getvalue()

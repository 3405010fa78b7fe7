"""Stability measurements: growth factor, factorization residual, normwise
and componentwise backward errors, the three Linpack-benchmark accuracy
ratios, and iterative refinement.

Residuals are accumulated in twice working precision using error-free
transformations (Veltkamp split two-product plus Knuth two-sum), then
rounded back to working precision.  Backward-error ratios use the 1-norm.
Epsilon conventions: HPL ratios use eps = 2^-52; ratio flooring and the
refinement stopping rule use the unit roundoff u = 2^-53.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from . import matcore

HPL_EPS = 2.0 ** -52
UNIT_ROUNDOFF = 2.0 ** -53

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitter for binary64


@dataclass
class StabilityReport:
    g_w: float
    rel_fact_error: float
    eta: float
    w: float
    hpl: tuple
    n_ir: float
    norm_l1: float
    norm_linv1: float
    norm_u1: float
    norm_uinv1: float


CSV_VERSION = 1
CSV_HEADER = ("g_w", "rel_fact_error", "eta", "w", "hpl1", "hpl2", "hpl3",
              "n_ir", "norm_l1", "norm_linv1", "norm_u1", "norm_uinv1")


def report_csv_row(rep):
    vals = (rep.g_w, rep.rel_fact_error, rep.eta, rep.w, *rep.hpl, rep.n_ir,
            rep.norm_l1, rep.norm_linv1, rep.norm_u1, rep.norm_uinv1)
    return ",".join(repr(float(v)) for v in vals)


def growth_factor(stats):
    """Largest intermediate entry over largest original entry."""
    return stats.growth_factor


def rel_factorization_error(a, perm, l, u):
    """|| Pi A - L U ||_F / || A ||_F."""
    pa = matcore.apply_row_perm(perm, matcore.as_matrix(a))
    resid = pa - matcore.matmul(l, u)
    denom = matcore.norm(a, "fro")
    if denom == 0.0:
        return matcore.norm(resid, "fro")
    return matcore.norm(resid, "fro") / denom


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a, b):
    p = a * b
    ca = _SPLIT * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLIT * b
    bh = cb - (cb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def residual_extended(a, x, rhs):
    """r = rhs - A x with compensated (twice working precision) accumulation."""
    a = matcore.as_matrix(a)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    rhs = np.asarray(rhs, dtype=np.float64).reshape(-1)
    if a.shape[1] != x.shape[0] or a.shape[0] != rhs.shape[0]:
        raise ValueError("residual_extended: shape mismatch")
    s = rhs.copy()
    comp = np.zeros_like(s)
    for j in range(a.shape[1]):
        p, pe = _two_prod(a[:, j], -x[j])
        s, se = _two_sum(s, p)
        comp += pe + se
    return s + comp


def normwise_backward_error(a, x, rhs):
    """eta = ||r||_1 / (||A||_1 ||x||_1 + ||rhs||_1)."""
    r = residual_extended(a, x, rhs)
    denom = (matcore.norm(a, "one") * float(np.abs(x).sum())
             + float(np.abs(np.asarray(rhs, dtype=np.float64)).sum()))
    num = float(np.abs(r).sum())
    if denom == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / denom


def componentwise_backward_error(a, x, rhs):
    """w = max_i |r_i| / (|A| |x| + |rhs|)_i; 0/0 counts as 0."""
    a = matcore.as_matrix(a)
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    bv = np.asarray(rhs, dtype=np.float64).reshape(-1)
    r = np.abs(residual_extended(a, xv, bv))
    denom = np.abs(a) @ np.abs(xv) + np.abs(bv)
    zero = denom == 0.0
    if np.any(r[zero] != 0.0):
        return np.inf
    live = ~zero
    if not live.any():
        return 0.0
    return float((r[live] / denom[live]).max())


def hpl_triplet(a, x, rhs):
    """Linpack accuracy ratios (threshold 16):
    ||Ax-b||_inf / (eps ||A||_1 n),
    ||Ax-b||_inf / (eps ||A||_1 ||x||_1),
    ||Ax-b||_inf / (eps ||A||_inf ||x||_inf n)."""
    a = matcore.as_matrix(a)
    n = a.shape[0]
    xv = np.asarray(x, dtype=np.float64).reshape(-1)
    rinf = float(np.abs(residual_extended(a, xv, rhs)).max())
    a1 = matcore.norm(a, "one")
    ainf = matcore.norm(a, "inf")
    x1 = float(np.abs(xv).sum())
    xinf = float(np.abs(xv).max())
    def ratio(num, den):
        if den == 0.0:
            return 0.0 if num == 0.0 else np.inf
        return num / den
    return (ratio(rinf, HPL_EPS * a1 * n),
            ratio(rinf, HPL_EPS * a1 * x1),
            ratio(rinf, HPL_EPS * ainf * xinf * n))


def iterative_refinement(factors, a, rhs, max_iters=10):
    """Classical refinement with compensated residuals.

    Stops when w <= n*u, when w fails to improve by at least 2x, or at
    max_iters.  Two consecutive increases of w are reported (a warning,
    never an exception).  Returns (x, n_ir, w_before).
    """
    a = matcore.as_matrix(a)
    n = a.shape[0]
    x = np.asarray(factors.solve(rhs), dtype=np.float64).reshape(-1)
    w = componentwise_backward_error(a, x, rhs)
    w_before = w
    best_x, best_w = x, w
    target = n * UNIT_ROUNDOFF
    steps = 0
    grew = 0
    while w > target and steps < max_iters:
        r = residual_extended(a, x, rhs)
        dx = np.asarray(factors.solve(r), dtype=np.float64).reshape(-1)
        x = x + dx
        w_new = componentwise_backward_error(a, x, rhs)
        steps += 1
        if w_new < best_w:
            best_x, best_w = x, w_new
        if w_new > w:
            grew += 1
            if grew >= 2:
                warnings.warn("iterative refinement diverging: w grew twice",
                              RuntimeWarning, stacklevel=2)
                break
        else:
            grew = 0
        if w_new > 0.5 * w:   # less than a 2x improvement
            w = w_new
            break
        w = w_new
    return best_x, steps, w_before


def triangular_inverse_norms(l, u):
    """1-norms of L, L^-1, U, U^-1 via explicit triangular inversion."""
    if l.shape[0] != l.shape[1] or u.shape[0] != u.shape[1]:
        raise ValueError("inverse norms need square factors")
    linv, info = lapack.dtrtri(l, lower=1, unitdiag=1)
    if info != 0:
        raise ArithmeticError(f"L inversion failed at diagonal {info}")
    uinv, info = lapack.dtrtri(u, lower=0, unitdiag=0)
    if info != 0:
        raise ArithmeticError(f"U inversion failed at diagonal {info}")
    np.fill_diagonal(linv, 1.0)
    return (matcore.norm(l, "one"), matcore.norm(np.tril(linv), "one"),
            matcore.norm(u, "one"), matcore.norm(np.triu(uinv), "one"))


def _growth_of(factors):
    stats = getattr(factors, "stats", None)
    return stats.growth_factor if stats is not None else factors.growth_factor


def full_report(a, factors, rhs):
    """Run the whole measurement battery for one solve-capable factorization.

    eta, w, and the Linpack ratios are measured at the direct solution;
    refinement then runs only to report the step count n_ir.
    """
    a = matcore.as_matrix(a)
    x0 = np.asarray(factors.solve(rhs), dtype=np.float64).reshape(-1)
    _, n_ir, w_before = iterative_refinement(factors, a, rhs)
    nl, nlinv, nu, nuinv = triangular_inverse_norms(factors.l, factors.u)
    return StabilityReport(
        g_w=_growth_of(factors),
        rel_fact_error=rel_factorization_error(a, factors.perm, factors.l, factors.u),
        eta=normwise_backward_error(a, x0, rhs),
        w=w_before,
        hpl=hpl_triplet(a, x0, rhs),
        n_ir=float(n_ir),
        norm_l1=nl, norm_linv1=nlinv, norm_u1=nu, norm_uinv1=nuinv,
    )

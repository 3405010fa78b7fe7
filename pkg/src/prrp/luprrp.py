"""Blocked LU with panel rank-revealing pivoting.

Each panel of b columns is pivoted by a strong RRQR of the panel
transpose, which bounds every panel multiplier by the threshold tau.  The
whole matrix is row-permuted, the trailing matrix receives one rank-b
update, and the b x b diagonal block together with its block row is then
finished by ordinary partial pivoting.

Growth statistics are sampled after every panel update and after every
rank-1 step inside the diagonal-block elimination, so the recorded
intermediate maximum really is the largest entry that ever appeared.

Two flop counters are kept.  ``flops_charged`` follows the idealized
per-panel charging scheme (panel QR: 2(m-(k-1)b)b^2 - 2/3 b^3; update:
2b(m-kb)(n-kb); block finish: 2/3 b^3 + (n-kb)b^2) and is independent of
how many interchange steps the panel factorization needed.
``flops_executed`` additionally counts each QR recomputation the swap
loop actually performed.  Both are exact rationals.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import matcore
from .errors import DimensionMismatch
from .gepp import gepp_factor
from .pivoted_qr import strong_rrqr


@dataclass
class ElimStats:
    """Element-growth bookkeeping for the blocked factorizations.

    ``intermediate_max`` tracks the trailing matrix after every panel
    update (plus the original matrix); this is the growth the blocked
    analysis bounds by (1 + tau b)^(n/b) and the measure reported as the
    growth factor.  ``finish_max`` additionally covers every rank-1 step
    inside the diagonal-block eliminations, whose extra (at most 2^b)
    factor sits outside that envelope; ``full_growth_factor`` reports it.
    """

    original_max: float
    intermediate_max: float
    finish_max: float = 0.0
    swap_counts: list = field(default_factory=list)
    flops_charged: Fraction = Fraction(0)
    flops_executed: Fraction = Fraction(0)
    # largest raw panel multiplier (the quantity the threshold bounds);
    # the stored triangular L mixes these with the diagonal-block finish
    panel_multiplier_max: float = 0.0

    def observe(self, block):
        if block.size:
            self.intermediate_max = max(self.intermediate_max,
                                        float(np.abs(block).max()))

    def observe_finish(self, value):
        self.finish_max = max(self.finish_max, float(value))

    def observe_multiplier(self, block):
        if block.size:
            self.panel_multiplier_max = max(self.panel_multiplier_max,
                                            float(np.abs(block).max()))

    @property
    def growth_factor(self):
        if self.original_max == 0.0:
            raise ZeroDivisionError("growth factor of an all-zero matrix")
        return self.intermediate_max / self.original_max

    @property
    def full_growth_factor(self):
        if self.original_max == 0.0:
            raise ZeroDivisionError("growth factor of an all-zero matrix")
        return max(self.intermediate_max, self.finish_max) / self.original_max


@dataclass
class BlockLUFactors:
    perm: np.ndarray       # apply_row_perm(perm, a) == l @ u
    l: np.ndarray          # m x n unit lower trapezoidal
    u: np.ndarray          # n x n upper triangular
    panel_width: int
    stats: ElimStats

    def solve(self, rhs):
        return luprrp_solve(self, rhs)


def _new_stats(a):
    mx = matcore.norm(a, "max")
    return ElimStats(original_max=mx, intermediate_max=mx, finish_max=mx)


def _permute_tail(work, l, p, col0, perm_rel):
    """Permute rows col0.. of the working matrix and of L by perm_rel."""
    rows = slice(col0, col0 + perm_rel.shape[0])
    work[rows, col0:] = work[rows, col0:][perm_rel, :]
    if col0:
        l[rows, :col0] = l[rows, :col0][perm_rel, :]
    p[rows] = p[rows][perm_rel]


def _gepp_finish(work, l, p, col0, bj, stats, compose_below=True):
    """Partial-pivoting finish of the diagonal block and its block row.

    The panel's multiplier block pairs with the untriangularized diagonal
    block, so once that block becomes Pi L11 U11 the stored subdiagonal
    part of L must absorb Pi and L11 (columns permuted, then times L11)
    for Pi A = L U to hold with triangular factors.
    """
    gf = gepp_factor(work[col0:col0 + bj, col0:])
    rows = slice(col0, col0 + bj)
    if col0:
        l[rows, :col0] = l[rows, :col0][gf.perm, :]
    p[rows] = p[rows][gf.perm]
    work[rows, col0:] = gf.u
    l[rows, col0:col0 + bj] = gf.l
    if compose_below and col0 + bj < l.shape[0]:
        below = l[col0 + bj:, col0:col0 + bj]
        l[col0 + bj:, col0:col0 + bj] = matcore.matmul(below[:, gf.perm], gf.l)
        stats.flops_executed += Fraction(2 * below.shape[0] * bj * bj)
    stats.observe_finish(gf.intermediate_max)
    return gf


def _extract_factors(work, l, n):
    u = np.asfortranarray(np.triu(work[:n, :]))
    return np.asfortranarray(l), u


def _charge_qr(rows, cols):
    return Fraction(2 * rows * cols * cols) - Fraction(2, 3) * cols ** 3


def _charge_block_finish(bj, width):
    return Fraction(2, 3) * bj ** 3 + Fraction((width - bj) * bj * bj)


def _validate(a, b, tau):
    m, n = a.shape
    if m < n:
        raise DimensionMismatch("need at least as many rows as columns")
    if not 1 <= b <= n:
        raise ValueError(f"panel width {b} out of range [1, {n}]")
    if tau <= 1.0:
        raise ValueError("tau must exceed 1")


def luprrp_factor(a, b, tau=2.0):
    """Factor an m x n (m >= n) matrix; panel width b, multiplier bound tau."""
    a = matcore.as_matrix(a)
    _validate(a, b, tau)
    m, n = a.shape
    work = a.copy(order="F")
    l = np.zeros((m, n), order="F")
    p = matcore.identity_perm(m)
    stats = _new_stats(a)
    col0 = 0
    panel = 0
    while col0 < n:
        bj = min(b, n - col0)
        rows = m - col0
        width = n - col0 - bj
        stats.flops_charged += _charge_qr(rows, bj)
        if rows > bj:
            try:
                srr = strong_rrqr(work[col0:, col0:col0 + bj].T, bj, tau)
            except ArithmeticError as exc:
                exc.panel = panel
                raise
            stats.flops_executed += (1 + srr.swap_count) * _charge_qr(rows, bj)
            stats.swap_counts.append(srr.swap_count)
            _permute_tail(work, l, p, col0, srr.qr.perm)
            l21 = srr.l_block
            stats.observe_multiplier(l21)
            l[col0 + bj:, col0:col0 + bj] = l21
            if width:
                upd = matcore.rank_update(work[col0 + bj:, col0 + bj:],
                                          l21, work[col0:col0 + bj, col0 + bj:])
                work[col0 + bj:, col0 + bj:] = upd
                stats.observe(upd)
        else:
            stats.swap_counts.append(0)
        stats.flops_charged += Fraction(2 * bj * (rows - bj) * width)
        stats.flops_executed += Fraction(2 * bj * (rows - bj) * width)
        try:
            _gepp_finish(work, l, p, col0, bj, stats)
        except ArithmeticError as exc:
            exc.panel = panel
            raise
        fin = _charge_block_finish(bj, n - col0)
        stats.flops_charged += fin
        stats.flops_executed += fin
        col0 += bj
        panel += 1
    lmat, umat = _extract_factors(work, l, n)
    return BlockLUFactors(perm=p, l=lmat, u=umat, panel_width=b, stats=stats)


def luprrp_solve(f, rhs):
    """Solve A x = rhs from square block factors."""
    if f.l.shape[0] != f.l.shape[1]:
        raise DimensionMismatch("solve needs factors of a square matrix")
    vec = np.asarray(rhs, dtype=np.float64)
    b2 = vec.reshape(-1, 1) if vec.ndim == 1 else vec
    if b2.shape[0] != f.l.shape[0]:
        raise DimensionMismatch("right-hand side row count mismatch")
    y = matcore.trsm_lower_unit(f.l, matcore.apply_row_perm(f.perm, b2))
    x = matcore.trsm_upper(f.u, y)
    return x[:, 0] if vec.ndim == 1 else x


def growth_bound_luprrp_log2(n, b, tau):
    """log2 of the growth envelope (1 + tau b)^ceil(n/b)."""
    if not (n >= b >= 1) or tau <= 0:
        raise ValueError("need n >= b >= 1 and tau > 0")
    return math.ceil(n / b) * math.log2(1.0 + tau * b)

def growth_bound_luprrp(n, b, tau):
    """Growth envelope (1 + tau b)^ceil(n/b); inf when it overflows."""
    lg = growth_bound_luprrp_log2(n, b, tau)
    return math.inf if lg > 1023.0 else 2.0 ** lg

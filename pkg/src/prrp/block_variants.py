"""Reduce-and-eliminate variants of the panel-RRQR factorization.

Unlike tournament pivoting, these factor each panel in a single pass over
a reduction tree: every node's strong RRQR immediately eliminates that
node's losing rows and updates their trailing columns.  The product of
the per-node eliminations is not lower triangular, so the factorization
is kept as an ordered event log (permutations and multiplier blocks)
plus the final upper factor; replaying the log against the original
matrix reproduces U.

``block_parallel_luprrp`` reduces each panel over a binary tree of P
leaf blocks (a leaf keeps at least b+1 rows, shrinking P if needed, the
same convention as tournament pivoting): leaves are eliminated
independently, then surviving b-row candidate sets are merged pairwise.
``block_pairwise_luprrp`` walks a flat chain: the first chunk of up to
2b rows is eliminated, then each following b-row chunk of raw panel rows
joins the current candidates and is reduced in turn.

Every multiplier block is bounded by tau; a row of the trailing matrix
is updated once per panel, so the growth envelope matches the
non-tournament factorization.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matcore
from .errors import DimensionMismatch, SingularMatrix
from .luprrp import _charge_qr, _new_stats, _validate, ElimStats
from .pivoted_qr import strong_rrqr
from .tournament import _partition


@dataclass
class RowPermEvent:
    perm: np.ndarray          # full-length row permutation


@dataclass
class ElimEvent:
    elim_rows: np.ndarray     # row positions updated (current positions)
    pivot_rows: np.ndarray    # positions of the rows they are updated against
    d: np.ndarray             # |elim| x |pivot| multiplier block
    zero_col0: int
    zero_col1: int            # columns [zero_col0, zero_col1) set to exact zero
    update_col0: int          # trailing update covers columns update_col0..


@dataclass
class BlockVariantFactors:
    events: list
    u: np.ndarray             # final upper factor (m x n working matrix)
    perm: np.ndarray          # composed global row permutation
    panel_width: int
    stats: ElimStats
    leaf_counts: list         # effective leaf count per panel

    @property
    def max_multiplier(self):
        vals = [float(np.abs(ev.d).max()) for ev in self.events
                if isinstance(ev, ElimEvent) and ev.d.size]
        return max(vals) if vals else 0.0


def _apply_elim(work, ev, stats=None):
    if ev.elim_rows.size:
        if ev.update_col0 < work.shape[1]:
            cur = work[ev.elim_rows, ev.update_col0:]
            piv = work[ev.pivot_rows, ev.update_col0:]
            upd = matcore.rank_update(cur, ev.d, piv)
            work[ev.elim_rows, ev.update_col0:] = upd
            if stats is not None:
                stats.observe(upd)
        work[ev.elim_rows, ev.zero_col0:ev.zero_col1] = 0.0


def replay_events(events, a):
    """Re-apply an event log to a fresh copy of the input matrix."""
    work = matcore.as_matrix(a).copy(order="F")
    for ev in events:
        if isinstance(ev, RowPermEvent):
            work = np.asfortranarray(work[ev.perm, :])
        else:
            _apply_elim(work, ev)
    return work


class _PanelState:
    """Shared bookkeeping for one panel's reduction."""

    def __init__(self, work, col0, bj, tau, events, stats):
        self.work = work
        self.col0 = col0
        self.bj = bj
        self.tau = tau
        self.events = events
        self.stats = stats
        self.swaps = 0

    def eliminate(self, idx):
        """Strong RRQR of panel rows idx; losers eliminated and updated now."""
        if idx.shape[0] <= self.bj:
            return idx
        work, col0, bj = self.work, self.col0, self.bj
        srr = strong_rrqr(work[idx, col0:col0 + bj].T, bj, self.tau)
        order = srr.qr.perm
        winners = idx[order[:bj]]
        losers = idx[order[bj:]]
        ev = ElimEvent(elim_rows=losers, pivot_rows=winners, d=srr.l_block,
                       zero_col0=col0, zero_col1=col0 + bj, update_col0=col0 + bj)
        _apply_elim(work, ev, self.stats)
        self.events.append(ev)
        self.swaps += srr.swap_count
        self.stats.flops_charged += _charge_qr(idx.shape[0], bj)
        self.stats.flops_executed += (1 + srr.swap_count) * _charge_qr(
            idx.shape[0], bj)
        upd = 2 * bj * losers.shape[0] * (work.shape[1] - col0 - bj)
        self.stats.flops_charged += Fraction(upd)
        self.stats.flops_executed += Fraction(upd)
        return winners


def _reduce_binary(state, rows, p):
    p_eff = max(1, min(p, rows // (state.bj + 1)))
    groups = [np.arange(state.col0 + lo, state.col0 + hi, dtype=np.intp)
              for lo, hi in _partition(rows, p_eff)]
    cands = [state.eliminate(idx) for idx in groups]
    while len(cands) > 1:
        merged = []
        for i in range(0, len(cands) - 1, 2):
            merged.append(state.eliminate(np.concatenate([cands[i], cands[i + 1]])))
        if len(cands) % 2:
            merged.append(cands[-1])     # odd node promoted unmerged
        cands = merged
    return cands[0], p_eff


def _reduce_chain(state, rows):
    col0, bj = state.col0, state.bj
    first = min(rows, 2 * bj)
    cand = state.eliminate(np.arange(col0, col0 + first, dtype=np.intp))
    start = first
    chunks = 1
    while start < rows:
        stop = min(rows, start + bj)
        nxt = np.arange(col0 + start, col0 + stop, dtype=np.intp)
        cand = state.eliminate(np.concatenate([cand, nxt]))
        start = stop
        chunks += 1
    return cand, chunks


def _permute_pivots_top(work, p, col0, pivots, events):
    m = work.shape[0]
    tail = np.arange(col0, m, dtype=np.intp)
    rest = np.setdiff1d(tail, pivots)
    full = np.concatenate([np.arange(col0, dtype=np.intp), pivots, rest])
    events.append(RowPermEvent(perm=full))
    work[:, :] = work[full, :]
    p[:] = p[full]


def _gepp_finish_events(work, p, col0, bj, stats, events):
    """Partial-pivoting finish of the diagonal block, recorded as events."""
    n = work.shape[1]
    for i in range(bj):
        c = col0 + i
        col = np.abs(work[c:col0 + bj, c])
        rel = int(np.argmax(col))
        if col[rel] == 0.0:
            raise SingularMatrix(f"zero pivot column {c}", column=c)
        if rel:
            full = np.arange(work.shape[0], dtype=np.intp)
            full[[c, c + rel]] = full[[c + rel, c]]
            events.append(RowPermEvent(perm=full))
            work[[c, c + rel], :] = work[[c + rel, c], :]
            p[[c, c + rel]] = p[[c + rel, c]]
        below = np.arange(c + 1, col0 + bj, dtype=np.intp)
        if below.size:
            d = (work[below, c] / work[c, c]).reshape(-1, 1)
            ev = ElimEvent(elim_rows=below, pivot_rows=np.array([c], dtype=np.intp),
                           d=d, zero_col0=c, zero_col1=c + 1, update_col0=c + 1)
            _apply_elim(work, ev)
            if c + 1 < n:
                stats.observe_finish(np.abs(work[below, c + 1:]).max())
            events.append(ev)
    fin = Fraction(2, 3) * bj ** 3 + Fraction((n - col0 - bj) * bj * bj)
    stats.flops_charged += fin
    stats.flops_executed += fin


def _factor_variant(a, b, tau, reduce_panel):
    a = matcore.as_matrix(a)
    _validate(a, b, tau)
    m, n = a.shape
    work = a.copy(order="F")
    p = matcore.identity_perm(m)
    stats = _new_stats(a)
    events = []
    leaf_counts = []
    col0 = 0
    panel = 0
    while col0 < n:
        bj = min(b, n - col0)
        rows = m - col0
        state = _PanelState(work, col0, bj, tau, events, stats)
        if rows > bj:
            try:
                pivots, p_eff = reduce_panel(state, rows)
            except ArithmeticError as exc:
                exc.panel = panel
                raise
            leaf_counts.append(p_eff)
            _permute_pivots_top(work, p, col0, pivots, events)
        else:
            leaf_counts.append(1)
        stats.swap_counts.append(state.swaps)
        try:
            _gepp_finish_events(work, p, col0, bj, stats, events)
        except ArithmeticError as exc:
            exc.panel = panel
            raise
        col0 += bj
        panel += 1
    return BlockVariantFactors(events=events, u=work, perm=p, panel_width=b,
                               stats=stats, leaf_counts=leaf_counts)


def block_parallel_luprrp(a, b, tau=2.0, p=4):
    """Binary-tree reduce-and-eliminate panel factorization."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return _factor_variant(a, b, tau,
                           lambda state, rows: _reduce_binary(state, rows, p))


def block_pairwise_luprrp(a, b, tau=2.0):
    """Flat-chain reduce-and-eliminate panel factorization."""
    a = matcore.as_matrix(a)
    if a.shape[0] < 2 * b + 1:
        raise DimensionMismatch("need at least 2b+1 rows")
    return _factor_variant(a, b, tau, _reduce_chain)


def effective_left_factor(factors, a):
    """Dense W with W @ U == (perm-applied A); test diagnostics only."""
    pa = matcore.apply_row_perm(factors.perm, matcore.as_matrix(a))
    n = pa.shape[1]
    return matcore.trsm_upper_right(pa, factors.u[:n, :n])

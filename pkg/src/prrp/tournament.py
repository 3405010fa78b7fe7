"""Tournament pivoting over binary and flat reduction trees, and the two
factorizations built on it: the communication-avoiding panel-RRQR LU and
the tournament-pivoted GEPP baseline.

Selection works on original rows of the current panel only.  At a leaf,
b candidate rows are chosen from the block (strong RRQR of the block
transpose, or partial pivoting of the block for the GEPP selector); at an
inner node the two children's candidates are stacked and reduced again.
The root's b rows are permuted to the diagonal in selection order, the
unpivoted QR of the permuted panel transpose supplies the multiplier
block, and the factorization proceeds exactly as the one-shot panel-RRQR
algorithm: rank-b trailing update, then a partial-pivoting finish of the
diagonal block.

When the whole reduction degenerates to a single node (one leaf, or a
panel short enough that the flat chain has one link) the panel is
processed through the identical code path as the non-tournament
factorization, so the factors agree bit for bit.

Binary leaf partition: rows split into P contiguous blocks, sizes as
equal as possible, first blocks larger; a leaf must keep at least b+1
rows, so P shrinks to floor(rows/(b+1)) when violated (recorded in the
trace).  Flat partition: a first chunk of up to 2b rows, then chunks of
b.  Merging is strictly sequential in node order, so results are
deterministic and bitwise reproducible by contract.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matcore
from .errors import DimensionMismatch, RankDeficient, SingularMatrix
from .gepp import gepp_factor
from .luprrp import (BlockLUFactors, _charge_block_finish, _charge_qr,
                     _extract_factors, _gepp_finish, _new_stats,
                     _permute_tail, _validate)
from .pivoted_qr import householder_qr, multiplier_block, strong_rrqr


@dataclass(frozen=True)
class ReductionTree:
    shape: str                  # 'binary' | 'flat'
    leaf_count: int | None = None   # binary: requested P; flat: derived

    def __post_init__(self):
        if self.shape not in ("binary", "flat"):
            raise ValueError(f"unknown tree shape {self.shape!r}")
        if self.shape == "binary":
            if self.leaf_count is None or self.leaf_count < 1:
                raise ValueError("binary tree needs a leaf count >= 1")


def binary_tree(p):
    return ReductionTree("binary", p)


def flat_tree():
    return ReductionTree("flat")


def _partition(m, p):
    """m rows into p contiguous blocks, as equal as possible, first larger."""
    base, extra = divmod(m, p)
    out = []
    start = 0
    for i in range(p):
        size = base + (1 if i < extra else 0)
        out.append((start, start + size))
        start += size
    return out


def leaf_blocks(tree, m, b):
    """Leaf row ranges for a panel of m rows; returns (blocks, effective_p)."""
    if tree.shape == "binary":
        p_eff = max(1, min(tree.leaf_count, m // (b + 1)))
        return _partition(m, p_eff), p_eff
    first = min(m, 2 * b)
    blocks = [(0, first)]
    start = first
    while start < m:
        stop = min(m, start + b)
        blocks.append((start, stop))
        start = stop
    return blocks, len(blocks)


def tree_height(tree, m, b):
    """Height H entering the growth bound (merge levels of the first panel)."""
    blocks, p_eff = leaf_blocks(tree, m, b)
    if tree.shape == "binary":
        return math.ceil(math.log2(p_eff)) if p_eff > 1 else 0
    return len(blocks) - 1


@dataclass
class TournamentNode:
    level: int
    index: int
    members: np.ndarray      # panel-relative row indices entering the node
    selected: np.ndarray     # the b survivors, in selection order
    swap_count: int


@dataclass
class TournamentTrace:
    nodes: list
    pivot_rows: np.ndarray
    leaf_count: int
    requested_leaf_count: int | None
    single_node: bool
    srr: object = None       # SrrqrResult when single_node with the srrqr selector


def _select(panel, idx, b, tau, selector):
    """Pick up to b candidate rows among panel[idx]; returns (selected,
    full_order, swap_count, srr_or_none).

    A numerically rank-deficient node passes along only its independent
    rows (fewer than b, possibly none): a singular block inside an
    otherwise nonsingular panel must not abort the reduction, it just
    contributes less.  srr is returned only for a full-width selection.
    """
    if idx.shape[0] <= b:
        return idx, idx, 0, None
    sub = panel[idx, :]
    if selector == "srrqr":
        want = b
        while want:
            try:
                srr = strong_rrqr(sub.T, want, tau)
            except RankDeficient as exc:
                want = exc.index
                continue
            order = srr.qr.perm
            return (idx[order[:want]], idx[order], srr.swap_count,
                    srr if want == b else None)
        return idx[:0], idx, 0, None
    if selector == "gepp":
        cols = b
        while cols:
            try:
                gf = gepp_factor(sub[:, :cols])
            except SingularMatrix as exc:
                cols = exc.column
                continue
            return idx[gf.perm[:cols]], idx[gf.perm], 0, None
        return idx[:0], idx, 0, None
    raise ValueError(f"unknown selector {selector!r}")


def tournament_select(panel, b, tau, tree, selector):
    """Reduce an m x b panel to b pivot rows; returns (perm, trace).

    perm brings the winners to the top in selection order; for a
    single-node reduction it is the selector's own full ordering so the
    degenerate case reproduces the non-tournament panel bit for bit.
    """
    panel = matcore.as_matrix(panel)
    m = panel.shape[0]
    if panel.shape[1] != b:
        raise DimensionMismatch(f"panel has {panel.shape[1]} columns, expected {b}")
    blocks, p_eff = leaf_blocks(tree, m, b)
    nodes = []
    if len(blocks) == 1:
        idx = np.arange(m, dtype=np.intp)
        selected, order, swaps, srr = _select(panel, idx, b, tau, selector)
        if selected.shape[0] < b:
            raise RankDeficient(
                f"panel supplied only {selected.shape[0]} independent rows",
                index=selected.shape[0])
        nodes.append(TournamentNode(0, 0, idx, selected, swaps))
        trace = TournamentTrace(nodes, selected, p_eff, tree.leaf_count, True, srr)
        return np.asarray(order, dtype=np.intp), trace

    def run_node(level, index, idx):
        try:
            selected, _, swaps, _ = _select(panel, idx, b, tau, selector)
        except ArithmeticError as exc:
            exc.tree_node = (level, index)
            raise
        nodes.append(TournamentNode(level, index, idx, selected, swaps))
        return selected

    if tree.shape == "binary":
        cands = [run_node(0, i, np.arange(lo, hi, dtype=np.intp))
                 for i, (lo, hi) in enumerate(blocks)]
        level = 1
        while len(cands) > 1:
            merged = []
            for i in range(0, len(cands) - 1, 2):
                idx = np.concatenate([cands[i], cands[i + 1]])
                merged.append(run_node(level, i // 2, idx))
            if len(cands) % 2:
                merged.append(cands[-1])     # odd node promoted unmerged
            cands = merged
            level += 1
        pivots = cands[0]
    else:
        lo, hi = blocks[0]
        cand = run_node(0, 0, np.arange(lo, hi, dtype=np.intp))
        for i, (lo, hi) in enumerate(blocks[1:], start=1):
            idx = np.concatenate([cand, np.arange(lo, hi, dtype=np.intp)])
            cand = run_node(i, 0, idx)
        pivots = cand

    if pivots.shape[0] < b:
        raise RankDeficient(
            f"tournament supplied only {pivots.shape[0]} independent rows",
            index=pivots.shape[0])
    rest = np.setdiff1d(np.arange(m, dtype=np.intp), pivots)
    perm = np.concatenate([pivots, rest]).astype(np.intp)
    trace = TournamentTrace(nodes, pivots, p_eff, tree.leaf_count, False, None)
    return perm, trace


def _charge_gepp_panel(rows, cols):
    return Fraction(rows * cols * cols) - Fraction(cols ** 3, 3)


def _tournament_charges(trace, b, selector):
    total = Fraction(0)
    for node in trace.nodes:
        r = int(node.members.shape[0])
        if r <= b:
            continue
        if selector == "srrqr":
            total += (1 + node.swap_count) * _charge_qr(r, b)
        else:
            total += _charge_gepp_panel(r, b)
    return total


def caluprrp_factor(a, b, tau=2.0, tree=None):
    """Tournament-pivoted panel-RRQR LU (binary tree by default, P=8)."""
    a = matcore.as_matrix(a)
    _validate(a, b, tau)
    if tree is None:
        tree = binary_tree(8)
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
                perm_rel, trace = tournament_select(
                    work[col0:, col0:col0 + bj], bj, tau, tree, "srrqr")
            except ArithmeticError as exc:
                exc.panel = panel
                raise
            _permute_tail(work, l, p, col0, perm_rel)
            if trace.single_node:
                l21 = trace.srr.l_block
                stats.swap_counts.append(trace.srr.swap_count)
                stats.flops_executed += (1 + trace.srr.swap_count) * _charge_qr(rows, bj)
            else:
                extra = _tournament_charges(trace, bj, "srrqr")
                stats.flops_charged += extra
                stats.flops_executed += extra + _charge_qr(rows, bj)
                qrf = householder_qr(work[col0:, col0:col0 + bj].T)
                l21 = multiplier_block(qrf.r, bj)
                stats.swap_counts.append(sum(nd.swap_count for nd in trace.nodes))
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


def calu_factor(a, b, tree=None):
    """Tournament-pivoted GEPP: selection and panel finish both by partial
    pivoting; panel multipliers are bounded only per node, not globally."""
    a = matcore.as_matrix(a)
    _validate(a, b, 2.0)
    if tree is None:
        tree = binary_tree(8)
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
        if rows > bj:
            try:
                perm_rel, trace = tournament_select(
                    work[col0:, col0:col0 + bj], bj, 2.0, tree, "gepp")
            except ArithmeticError as exc:
                exc.panel = panel
                raise
            _permute_tail(work, l, p, col0, perm_rel)
            extra = _tournament_charges(trace, bj, "gepp")
            stats.flops_charged += extra
            stats.flops_executed += extra
            stats.swap_counts.append(0)
            try:
                _gepp_finish(work, l, p, col0, bj, stats, compose_below=False)
            except ArithmeticError as exc:
                exc.panel = panel
                raise
            u11 = work[col0:col0 + bj, col0:col0 + bj]
            l21 = matcore.trsm_upper_right(work[col0 + bj:, col0:col0 + bj], u11)
            stats.observe_multiplier(l21)
            l[col0 + bj:, col0:col0 + bj] = l21
            cost = Fraction((rows - bj) * bj * bj + 2 * bj * (rows - bj) * width)
            stats.flops_charged += cost
            stats.flops_executed += cost
            if width:
                upd = matcore.rank_update(work[col0 + bj:, col0 + bj:],
                                          l21, work[col0:col0 + bj, col0 + bj:])
                work[col0 + bj:, col0 + bj:] = upd
                stats.observe(upd)
        else:
            stats.swap_counts.append(0)
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


def growth_bound_caluprrp_log2(n, b, tau, h):
    """log2 of (1 + tau b)^(ceil(n/b)(H+1) - 1)."""
    if not (n >= b >= 1) or h < 0:
        raise ValueError("need n >= b >= 1 and h >= 0")
    return (math.ceil(n / b) * (h + 1) - 1) * math.log2(1.0 + tau * b)


def growth_bound_caluprrp(n, b, tau, h):
    """Growth envelope for tournament pivoting of height h; inf on overflow."""
    lg = growth_bound_caluprrp_log2(n, b, tau, h)
    return math.inf if lg > 1023.0 else 2.0 ** lg


def growth_condition(b, tau, h):
    """True iff h <= b / (log2 b + log2 tau), the regime where the
    tournament bound stays below the partial-pivoting worst case."""
    if b < 2 or tau <= 1.0:
        raise ValueError("need b >= 2 and tau > 1")
    return h <= b / (math.log2(b) + math.log2(tau))

"""Householder QR, QR with column pivoting, and the threshold-bounded
strong rank-revealing QR used for every pivot selection in the package.

Strong RRQR contract: for an h x p input with p >= b+1 columns and a
threshold tau > 1, the returned column permutation satisfies
``max |R11^-1 R12| <= tau`` where R11 is the leading b x b block of R.
It is obtained by QR with column pivoting followed by a bounded loop of
column interchanges; after each interchange the QR of the permuted matrix
is recomputed from scratch (simpler than updating, and equivalent).

Conventions: ties in column pivoting go to the lowest column index; in
the swap loop the interchange picked is the one with the largest
offending multiplier, ties to the smallest (i, j) lexicographically.
Identical inputs give identical bits.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import NonConvergence, RankDeficient

EPS = 2.0 ** -52


@dataclass
class QRFactors:
    q: np.ndarray          # h x h explicit orthogonal factor
    r: np.ndarray          # h x p upper trapezoidal
    perm: np.ndarray       # column permutation: (A Pi)[:, j] = A[:, perm[j]]


@dataclass
class SrrqrResult:
    qr: QRFactors
    tau: float
    swap_count: int
    l_block: np.ndarray    # (p - b) x b, equal to (R11^-1 R12)^T


def _reflect(r, q, k):
    """Apply the Householder reflector that zeroes column k below row k."""
    x = r[k:, k]
    normx = float(np.sqrt((x * x).sum()))
    if normx == 0.0:
        return
    alpha = -normx if x[0] >= 0.0 else normx
    v = x.copy()
    v[0] -= alpha
    vtv = float((v * v).sum())
    if vtv == 0.0:
        return
    beta = 2.0 / vtv
    w = beta * (v @ r[k:, k:])
    r[k:, k:] -= np.outer(v, w)
    qv = q[:, k:] @ v
    q[:, k:] -= np.outer(beta * qv, v)
    r[k, k] = alpha
    r[k + 1:, k] = 0.0


def householder_qr(a):
    """Unpivoted Householder QR with Q assembled explicitly."""
    r = matcore.as_matrix(a).copy(order="F")
    h, p = r.shape
    q = np.eye(h, order="F")
    for k in range(min(h, p)):
        _reflect(r, q, k)
    return QRFactors(q=q, r=r, perm=matcore.identity_perm(p))


def qr_column_pivoting(a):
    """QR with column pivoting; exact column norms recomputed each step."""
    r = matcore.as_matrix(a).copy(order="F")
    h, p = r.shape
    q = np.eye(h, order="F")
    perm = matcore.identity_perm(p)
    for k in range(min(h, p)):
        sub = r[k:, k:]
        j = k + int(np.argmax((sub * sub).sum(axis=0)))
        if j != k:
            r[:, [k, j]] = r[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
        _reflect(r, q, k)
    return QRFactors(q=q, r=r, perm=perm)


def multiplier_block(r, b):
    """(R11^-1 R12)^T from an upper trapezoidal R, via triangular solve."""
    r = matcore.as_matrix(r)
    if r.shape[0] < b or r.shape[1] < b:
        raise ValueError("R smaller than the requested leading block")
    if r.shape[1] == b:
        return np.zeros((0, b), order="F")
    x = matcore.trsm_upper(r[:b, :b], r[:b, b:])
    return np.asfortranarray(x.T)


def _check_rank(r, b, fro):
    for k in range(b):
        if abs(r[k, k]) < EPS * fro:
            raise RankDeficient(
                f"leading R block numerically singular at diagonal {k}", index=k)


def swap_cap(b, p, tau):
    """Iteration cap for the interchange loop."""
    return int(math.ceil(2.0 * b * math.log(max(p, 2)) / math.log(tau))) + 10


def strong_rrqr(a, b, tau):
    """Strong RRQR of a with leading block size b and threshold tau > 1."""
    a = matcore.as_matrix(a)
    h, p = a.shape
    if tau <= 1.0:
        raise ValueError("tau must exceed 1")
    if h < b or p < b + 1:
        raise ValueError(
            f"strong_rrqr needs >= {b} rows and >= {b + 1} columns, got {h}x{p}")
    fro = matcore.norm(a, "fro")
    qrf = qr_column_pivoting(a)
    _check_rank(qrf.r, b, fro)
    lt = matcore.trsm_upper(qrf.r[:b, :b], qrf.r[:b, b:])  # R11^-1 R12
    cap = swap_cap(b, p, tau)
    swaps = 0
    perm = qrf.perm
    while True:
        worst = float(np.abs(lt).max()) if lt.size else 0.0
        if worst <= tau:
            break
        if swaps >= cap:
            raise NonConvergence(
                f"swap cap {cap} exceeded, worst multiplier {worst}", worst=worst)
        flat = int(np.argmax(np.abs(lt)))       # row-major: smallest (i, j) wins ties
        i, j = flat // lt.shape[1], flat % lt.shape[1]
        perm = perm.copy()
        perm[[i, b + j]] = perm[[b + j, i]]
        qrf = householder_qr(a[:, perm])
        qrf = QRFactors(q=qrf.q, r=qrf.r, perm=perm)
        _check_rank(qrf.r, b, fro)
        lt = matcore.trsm_upper(qrf.r[:b, :b], qrf.r[:b, b:])
        swaps += 1
    l_block = np.asfortranarray(lt.T)
    assert l_block.size == 0 or float(np.abs(l_block).max()) <= tau
    return SrrqrResult(qr=qrf, tau=tau, swap_count=swaps, l_block=l_block)

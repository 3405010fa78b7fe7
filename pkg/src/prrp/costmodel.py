"""Analytic communication/computation model: flop counts of the blocked
panel-RRQR factorization, per-algorithm message/word/flop estimates for a
2-D block-cyclic layout, the communication-optimal layout choice, and the
memory-based lower bounds.

All logarithms are base 2.  Lower bounds return the order-term argument
with constant 1 (constants are not asserted anywhere).  The exact flop
count is the telescoped sum of the per-panel charges

    panel QR:    2 (m-(k-1)b) b^2 - 2/3 b^3
    update:      2 b (m-kb) (n-kb)
    block finish: 2/3 b^3 + (n-kb) b^2

which for b | n collapses to  mn^2 - n^3/3 + bmn - bn^2/2 + 5nb^2/6.
(The widely quoted mn^2 + 2mnb + 2nb^2 - n^2b/2 - n^3/3 does not equal the
sum of those per-step charges; this module keeps the exact sum, which is
also what the instrumented counter reproduces.)
"""

import math
from dataclasses import dataclass
from fractions import Fraction

ALGORITHMS = ("caluprrp", "calu", "pdgetrf")


@dataclass(frozen=True)
class CostReport:
    messages: float
    words: float
    flops: float
    algorithm: str
    layout: tuple      # (m, n, b, p_r, p_c)


@dataclass(frozen=True)
class MachineModel:
    alpha: float       # latency cost per message
    beta: float        # inverse bandwidth, cost per word
    gamma: float       # cost per flop

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) <= 0:
            raise ValueError("machine parameters must be positive")


def flops_luprrp_exact(m, n, b):
    """Exact rational per-panel charge sum (ceil(n/b) panels, short last)."""
    if not (m >= n >= b >= 1):
        raise ValueError("need m >= n >= b >= 1")
    total = Fraction(0)
    col0 = 0
    while col0 < n:
        bj = min(b, n - col0)
        rows = m - col0
        width = n - col0 - bj
        total += Fraction(2 * rows * bj * bj) - Fraction(2, 3) * bj ** 3
        total += Fraction(2 * bj * (rows - bj) * width)
        total += Fraction(2, 3) * bj ** 3 + Fraction(width * bj * bj)
        col0 += bj
    return total


def flops_luprrp(m, n, b):
    """Float value of the exact charge sum; for b | n this equals
    mn^2 - n^3/3 + bmn - bn^2/2 + 5nb^2/6."""
    return float(flops_luprrp_exact(m, n, b))


def flops_luprrp_closed_form(m, n, b):
    """Closed form of the charge sum, valid when b divides n."""
    if n % b:
        raise ValueError("closed form needs b | n")
    return Fraction(n, 6) * (5 * b * b + 6 * b * m - 3 * b * n + 6 * m * n
                             - 2 * n * n)


def instrumented_flops(stats):
    """The charged-operation counter a factorization accumulated."""
    return stats.flops_charged


def _words_tournament(m, n, b, p_r, p_c):
    # identical for the tournament-pivoted algorithms
    lr, lc = math.log2(p_r), math.log2(p_c)
    return (n * b + 1.5 * n * n / p_c) * lr + (m * n - n * n / 2.0) / p_r * lc


def perf_model(algorithm, m, n, b, p_r, p_c):
    """Critical-path message/word/flop estimates on a p_r x p_c grid."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if p_r < 1 or p_c < 1 or not (m >= n >= b >= 1):
        raise ValueError("invalid layout")
    p = p_r * p_c
    lr, lc = math.log2(p_r), math.log2(p_c)
    base_flops = (m * n * n - n ** 3 / 3.0) / p
    if algorithm == "caluprrp":
        messages = 3.0 * n / b * lr + 2.0 * n / b * lc
        words = _words_tournament(m, n, b, p_r, p_c)
        flops = (base_flops + 2.0 / p_r * (2 * m * n - n * n) * b
                 + n * n * b / (2.0 * p_c) + 10.0 * n * b * b / 3.0 * lr)
    elif algorithm == "calu":
        messages = 3.0 * n / b * lr + 3.0 * n / b * lc
        words = _words_tournament(m, n, b, p_r, p_c)
        flops = (base_flops + 1.0 / p_r * (2 * m * n - n * n) * b
                 + n * n * b / (2.0 * p_c) + n * b * b / 3.0 * (5.0 * lr - 1.0))
    else:  # pdgetrf
        messages = 2.0 * n * (1.0 + 2.0 / b) * lr + 3.0 * n / b * lc
        words = (n * b / 2.0 + 1.5 * n * n / p_c) * lr \
            + (m * n - n * n / 2.0) / p_r * lc
        flops = base_flops + (m * n - n * n / 2.0) * b / p_r \
            + n * n * b / (2.0 * p_c)
    return CostReport(messages=messages, words=words, flops=flops,
                      algorithm=algorithm, layout=(m, n, b, p_r, p_c))


def square_panel_width(n, p):
    """Optimal b for a square matrix: n / (sqrt(P) log2^2 P)."""
    if p <= 1:
        raise ValueError("needs p > 1")
    return n / (math.sqrt(p) * math.log2(p) ** 2)


def square_panel_width_quartered(n, p):
    """Same choice written as (1/4) log2^-2(sqrt(P)) n / sqrt(P)."""
    if p <= 1:
        raise ValueError("needs p > 1")
    return 0.25 / math.log2(math.sqrt(p)) ** 2 * n / math.sqrt(p)


def optimal_layout(m, n, p):
    """Communication-optimal (p_r, p_c, b), rounded down and clamped to 1.

    The real-valued choice is p_r = sqrt(mP/n), p_c = sqrt(nP/m),
    b = log2^-2(mP/n) sqrt(mn/P); with P = 1 (or whenever the log term
    vanishes) communication is moot and b = n.
    """
    if m < 1 or n < 1 or p < 1:
        raise ValueError("need positive dimensions")
    p_r = max(1, math.floor(math.sqrt(m * p / n)))
    p_c = max(1, math.floor(math.sqrt(n * p / m)))
    lg = math.log2(m * p / n)
    if lg <= 0:
        b = n
    else:
        b = max(1, min(n, math.floor(math.sqrt(m * n / p) / lg ** 2)))
    return p_r, p_c, b


def lower_bounds(n, mem):
    """(words, messages) communication lower-bound arguments for memory mem."""
    if n < 1 or mem <= 0:
        raise ValueError("need n >= 1 and mem > 0")
    return n ** 3 / math.sqrt(mem), n ** 3 / mem ** 1.5


def total_time(report, machine):
    """alpha * messages + beta * words + gamma * flops."""
    return (machine.alpha * report.messages + machine.beta * report.words
            + machine.gamma * report.flops)

"""Deterministic test-matrix generators.

Random draws come from one named generator: PCG64 seeded with the spec's
seed, uniforms via ``Generator.random`` (53-bit in [0, 1)), and normal
deviates via an explicit Box-Muller transform (pairs (u1, u2) -> radius
sqrt(-2 log(1-u1)), angle 2 pi u2, interleaved cos/sin).  Matrices are
filled from the flat draw sequence in row-major order.  Identical specs
therefore give identical bits.

Gallery formulas below are written 1-based as usually quoted; the code is
the 0-based translation.  Families listed in LISTED_UNSUPPORTED are
recognized names that this package deliberately does not generate.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import UnsupportedFamily


@dataclass(frozen=True)
class MatrixSpec:
    family: str
    n: int
    params: dict = field(default_factory=dict)
    seed: int = 0


LISTED_UNSUPPORTED = (
    "randcorr", "randcolu", "randsvd", "sprandn", "poisson", "toeppd",
    "prolate", "invhess", "house", "toeppen", "condex", "forsythe", "compar",
)


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _normals(rng, count):
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    rad = np.sqrt(-2.0 * np.log1p(-u1))
    ang = 2.0 * np.pi * u2
    z = np.empty(2 * pairs)
    z[0::2] = rad * np.cos(ang)
    z[1::2] = rad * np.sin(ang)
    return z[:count]


def gen_randn(n, seed):
    if n < 1:
        raise ValueError("n must be positive")
    return np.asfortranarray(_normals(_rng(seed), n * n).reshape(n, n))


def gen_identity(n):
    return np.eye(n, order="F")


def gen_wilkinson(n):
    """Worst case for partial pivoting: unit diagonal, -1 strictly below,
    +1 in the last column above the diagonal."""
    if n < 2:
        raise ValueError("n must be >= 2")
    a = np.tril(-np.ones((n, n)), -1) + np.eye(n)
    a[:n - 1, n - 1] = 1.0
    return np.asfortranarray(a)


def gen_wilkinson_eigentest(n):
    """The tridiagonal eigenvalue-test matrix W_n: diagonal |i - (n+1)/2|
    (1-based), unit off-diagonals.  This is the 'Wilkinson matrix' of the
    published stability tables; the dense partial-pivoting worst case is
    :func:`gen_wilkinson`."""
    if n < 2:
        raise ValueError("n must be >= 2")
    d = np.abs(np.arange(1, n + 1) - (n + 1) / 2.0)
    return np.asfortranarray(np.diag(d) + np.diag(np.ones(n - 1), 1)
                             + np.diag(np.ones(n - 1), -1))


def gen_generalized_wilkinson(n, r=2, seed=0, u=None, v=None):
    """Random upper-semiseparable-transpose variant of the Wilkinson form.

    With u, v omitted (the usual case): u, v are uniform n x r draws, the
    strict upper part of -u v^T is normalized row by row so every entry
    stays below 1 in magnitude, then the matrix is transposed, given a
    unit diagonal, and its last column set to ones.  Passing u and v skips
    the normalization (the fixed-input branch used by tests).
    """
    if n < 2 or r < 1:
        raise ValueError("need n >= 2 and r >= 1")
    if (u is None) != (v is None):
        raise ValueError("u and v must be given together")
    if u is None:
        rng = _rng(seed)
        u = rng.random((n, r))
        v = rng.random((n, r))
        a = -np.triu(u @ v.T)
        for k in range(1, n):
            umax = np.abs(a[k - 1, k:]).max() * (1.0 + 1.0 / n)
            a[k - 1, k:] /= umax
    else:
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        a = np.triu(u @ v.T)
    a = a - np.diag(np.diag(a))
    a = a.T + np.eye(n)
    a[:n - 1, n - 1] = 1.0
    return np.asfortranarray(a)


def gen_foster(n, c=1.0, h=1.0, k=2.0 / 3.0):
    """Quadrature discretization of a Volterra integral equation."""
    if c == 0.0:
        raise ValueError("c must be nonzero")
    if n < 2:
        raise ValueError("n must be >= 2")
    kh = k * h
    a = np.zeros((n, n), order="F")
    a[np.tril_indices(n, -1)] = -kh
    a[1:, 0] = -kh / 2.0
    np.fill_diagonal(a, 1.0 - kh / 2.0)
    a[0, 0] = 1.0
    a[:n - 1, n - 1] = -1.0 / c
    a[n - 1, n - 1] = 1.0 - 1.0 / c - kh / 2.0
    return a


def gen_wright(n, h=0.3):
    """Two-point boundary-value (multiple shooting) matrix: 2x2 identity
    diagonal blocks, -(I + M h) subdiagonal blocks, identity corner."""
    if n % 2 or n < 4:
        raise ValueError("n must be even and >= 4")
    emh = np.array([[1.0 - h / 6.0, h], [h, 1.0 - h / 6.0]])
    a = np.eye(n, order="F")
    for i in range(2, n, 2):
        a[i:i + 2, i - 2:i] = -emh
    a[0:2, n - 2:n] = np.eye(2)
    return a


# -- closed-form gallery subset ----------------------------------------------

def _hadamard(n):
    if n < 1 or (n & (n - 1)):
        raise ValueError("hadamard needs n a power of 2")
    h = np.ones((1, 1))
    while h.shape[0] < n:
        h = np.block([[h, h], [h, -h]])
    return h


def _parter(n):
    i, j = np.indices((n, n))
    return 1.0 / (i - j + 0.5)


def _ris(n):
    i, j = np.indices((n, n))
    return 0.5 / (n - i - j - 0.5)


def _kms(n, rho=0.5):
    i, j = np.indices((n, n))
    return rho ** np.abs(i - j)


def _hilb(n):
    i, j = np.indices((n, n))
    return 1.0 / (i + j + 1.0)


def _lotkin(n):
    a = _hilb(n)
    a[0, :] = 1.0
    return a


def _cauchy(n, seed):
    rng = _rng(seed)
    x = _normals(rng, n)
    y = _normals(rng, n)
    return 1.0 / (x[:, None] + y[None, :])


def _lehmer(n):
    i, j = np.indices((n, n))
    return (np.minimum(i, j) + 1.0) / (np.maximum(i, j) + 1.0)


def _minij(n):
    i, j = np.indices((n, n))
    return np.minimum(i, j) + 1.0


def _frank(n):
    i, j = np.indices((n, n))
    a = (n - np.maximum(i, j)).astype(float)
    a[j < i - 1] = 0.0
    return a


def _fiedler(n, seed):
    x = _normals(_rng(seed), n)
    return np.abs(x[:, None] - x[None, :])


def _pei(n, seed):
    alpha = float(_normals(_rng(seed), 1)[0])
    return alpha * np.eye(n) + np.ones((n, n))


def _tridiag(n):
    return (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1))


def _jordbloc(n, lam=1.0):
    return lam * np.eye(n) + np.eye(n, k=1)


def _compan(n, seed):
    coeffs = _normals(_rng(seed), n + 1)
    a = np.zeros((n, n))
    a[0, :] = -coeffs[1:] / coeffs[0]
    a[1:, :-1] = np.eye(n - 1)
    return a


def _kahan(n, theta=1.2):
    s, c = np.sin(theta), np.cos(theta)
    a = np.triu(-c * np.ones((n, n)), 1) + np.eye(n)
    return (s ** np.arange(n))[:, None] * a


def _dorr(n, theta=0.01):
    h = 1.0 / (n + 1)
    mid = (n + 1) // 2
    term = theta / h ** 2
    sub = np.zeros(n)
    dia = np.zeros(n)
    sup = np.zeros(n)
    for i in range(1, n + 1):
        if i <= mid:
            sub[i - 1] = -term
            sup[i - 1] = sub[i - 1] - (0.5 - i * h) / h
        else:
            sup[i - 1] = -term
            sub[i - 1] = sup[i - 1] + (0.5 - i * h) / h
        dia[i - 1] = -(sub[i - 1] + sup[i - 1])
    return np.diag(dia) + np.diag(sub[1:], -1) + np.diag(sup[:-1], 1)


def _demmel(n, seed):
    d = 10.0 ** (14.0 * np.arange(n) / n)
    return d[:, None] * (np.eye(n) + 1e-7 * _rng(seed).random((n, n)))


def _circul(n, seed):
    v = _normals(_rng(seed), n)
    i, j = np.indices((n, n))
    return v[(j - i) % n]


def _hankel(n, seed):
    rng = _rng(seed)
    c = _normals(rng, n)
    r = _normals(rng, n)
    c[n - 1] = r[0]
    i, j = np.indices((n, n))
    s = i + j
    out = np.where(s < n, c[np.minimum(s, n - 1)], r[np.maximum(s - n + 1, 0)])
    return out.astype(float)


def _moler(n):
    i, j = np.indices((n, n))
    a = np.minimum(i, j) - 1.0
    np.fill_diagonal(a, np.arange(1, n + 1, dtype=float))
    return a


def _riemann(n):
    i, j = np.indices((n, n))
    ii, jj = i + 2, j + 2
    return np.where(jj % ii == 0, ii - 1.0, -1.0)


def _chebvand(n):
    x = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    a = np.empty((n, n))
    a[0, :] = 1.0
    if n > 1:
        a[1, :] = x
    for k in range(2, n):
        a[k, :] = 2.0 * x * a[k - 1, :] - a[k - 2, :]
    return a


def _chebspec(n):
    """Spectral differentiation on Chebyshev points, nonsingular variant
    (order n+1 matrix with its first row and column deleted)."""
    m = n + 1
    k = np.arange(m)
    x = np.cos(k * np.pi / (m - 1))
    c = np.ones(m)
    c[0] = 2.0
    c[m - 1] = 2.0
    d = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                d[i, j] = (c[i] / c[j]) * (-1.0) ** (i + j) / (x[i] - x[j])
            elif 0 < i < m - 1:
                d[i, i] = -x[i] / (2.0 * (1.0 - x[i] ** 2))
    d[0, 0] = (2.0 * (m - 1) ** 2 + 1.0) / 6.0
    d[m - 1, m - 1] = -d[0, 0]
    return d[1:, 1:]


_SPECIAL = {
    "hadamard": lambda n, seed: _hadamard(n),
    "parter": lambda n, seed: _parter(n),
    "ris": lambda n, seed: _ris(n),
    "kms": lambda n, seed: _kms(n),
    "hilb": lambda n, seed: _hilb(n),
    "lotkin": lambda n, seed: _lotkin(n),
    "cauchy": _cauchy,
    "lehmer": lambda n, seed: _lehmer(n),
    "minij": lambda n, seed: _minij(n),
    "frank": lambda n, seed: _frank(n),
    "fiedler": _fiedler,
    "pei": _pei,
    "tridiag": lambda n, seed: _tridiag(n),
    "jordbloc": lambda n, seed: _jordbloc(n),
    "compan": _compan,
    "kahan": lambda n, seed: _kahan(n),
    "dorr": lambda n, seed: _dorr(n),
    "demmel": _demmel,
    "circul": _circul,
    "hankel": _hankel,
    "moler": lambda n, seed: _moler(n),
    "riemann": lambda n, seed: _riemann(n),
    "chebvand": lambda n, seed: _chebvand(n),
    "chebspec": lambda n, seed: _chebspec(n),
}


def gen_special(name, n, seed=0):
    if name in LISTED_UNSUPPORTED:
        raise UnsupportedFamily(
            f"family {name!r} is listed but not generated by this package")
    if name not in _SPECIAL:
        raise UnsupportedFamily(f"unknown matrix family {name!r}")
    return np.asfortranarray(_SPECIAL[name](n, seed))


def special_families():
    return sorted(_SPECIAL)


# -- spec parsing / dispatch ---------------------------------------------------

def _parse_value(text):
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_spec(text, seed=0):
    """Parse 'family:n[:key=value,...]' into a MatrixSpec."""
    parts = text.split(":")
    if len(parts) < 2:
        raise ValueError(f"generator spec {text!r} must look like family:n")
    family = parts[0].strip().lower()
    n = int(parts[1])
    params = {}
    if len(parts) > 2:
        for item in parts[2].split(","):
            if not item:
                continue
            if "=" not in item:
                raise ValueError(f"bad parameter {item!r} in spec {text!r}")
            key, val = item.split("=", 1)
            params[key.strip()] = _parse_value(val.strip())
    return MatrixSpec(family=family, n=n, params=params, seed=seed)


def generate(spec):
    """Materialize a MatrixSpec (pure function of the spec)."""
    fam, n, prm = spec.family, spec.n, dict(spec.params)
    if fam == "randn":
        return gen_randn(n, spec.seed)
    if fam == "identity":
        return gen_identity(n)
    if fam == "wilkinson":
        return gen_wilkinson(n)
    if fam in ("genwilk", "generalized_wilkinson"):
        return gen_generalized_wilkinson(n, r=int(prm.pop("r", 2)), seed=spec.seed)
    if fam == "foster":
        return gen_foster(n, c=prm.pop("c", 1.0), h=prm.pop("h", 1.0),
                          k=prm.pop("k", 2.0 / 3.0))
    if fam == "wright":
        return gen_wright(n, h=prm.pop("h", 0.3))
    return gen_special(fam, n, seed=spec.seed)

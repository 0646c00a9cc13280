"""Driving-sequence construction.

All constructions produce a :class:`DrivingSequence`: a read-only array of
units in [0, 1) plus the parameters needed to rebuild it bit-for-bit.

Integer LCG arithmetic uses ``x_t = a * x_{t-1} mod N`` with ``x_0 = 1``;
products of two residues below 2**31 fit in int64, so every modulus up to
2**31 is handled without overflow.
"""

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

import numpy as np

from wcud.rng import iid_units

EPS = 1e-15

#: Multipliers for the LCG lattices used in the probit study, keyed by prime N.
TABULATED_MULTIPLIERS = {1021: 65, 2039: 393, 4093: 235, 8191: 884, 16381: 665}

METHODS = ("iid", "lcg", "lcg-cp", "liao", "block-perm", "iid-insert", "custom")


@dataclass(frozen=True, eq=False)
class DrivingSequence:
    """Finite ordered list of units in [0, 1) with construction metadata."""

    values: np.ndarray
    method: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size == 0:
            raise ValueError("a driving sequence needs at least one value")
        if not np.all((values >= 0.0) & (values < 1.0)):
            bad = values[~((values >= 0.0) & (values < 1.0))][:3]
            raise ValueError(f"driving values must lie in [0, 1); offending values {bad}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}; expected one of {METHODS}")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __getitem__(self, item):
        return self.values[item]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def rows(self, m):
        """View the first ``m * floor(len / m)`` values as rows of width ``m``."""
        n = len(self) // m
        return self.values[: n * m].reshape(n, m)


def clamp_units(u, eps=EPS):
    """Clamp units to ``[eps, 1 - eps]`` before any inverse CDF."""
    return np.clip(np.asarray(u, dtype=np.float64), eps, 1.0 - eps)


def _as_values(u):
    if isinstance(u, DrivingSequence):
        return u.values
    return np.asarray(u, dtype=np.float64).ravel()


def _meta(u):
    return dict(u.meta) if isinstance(u, DrivingSequence) else {}


# -- number theory ---------------------------------------------------------

def prime_factors(n):
    """Distinct prime factors of ``n`` in increasing order (trial division)."""
    if n < 1:
        raise ValueError(f"prime_factors needs n >= 1, got {n}")
    factors = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            factors.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        factors.append(n)
    return factors


def is_prime(n):
    return n >= 2 and prime_factors(n) == [n]


def totient(n):
    """Euler's totient: how many of 1..n are coprime to n."""
    if n < 1:
        raise ValueError(f"totient is defined for n >= 1, got {n}")
    result = n
    for p in prime_factors(n):
        result -= result // p
    return result


def is_primitive_root(a, N):
    """True iff ``a`` has multiplicative order ``N - 1`` modulo the prime ``N``."""
    if not is_prime(N):
        raise ValueError(f"modulus {N} is not prime")
    if not 1 <= a < N:
        raise ValueError(f"need 1 <= a < N, got a={a}, N={N}")
    if N == 2:
        return a == 1
    return all(pow(a, (N - 1) // q, N) != 1 for q in prime_factors(N - 1))


def primitive_roots(N):
    """All primitive roots modulo the prime ``N``, increasing."""
    if not is_prime(N):
        raise ValueError(f"modulus {N} is not prime")
    return [a for a in range(1, N) if is_primitive_root(a, N)]


# -- LCG lattice -----------------------------------------------------------

@dataclass(frozen=True)
class LatticeSpec:
    """Full-period LCG lattice with prime modulus ``N`` and multiplier ``a``.

    ``m`` is the tuple width (uniforms per MCMC step), ``g = gcd(m, N - 1)``
    the number of rescaled blocks and ``b = (N - 1) / g`` the rows per block.
    """

    N: int
    a: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"tuple width m must be >= 1, got {self.m}")
        if not is_prime(self.N):
            raise ValueError(f"N={self.N} is not prime")
        if self.N >= 2**31:
            raise ValueError(f"N={self.N} exceeds the supported 2**31 range")
        if not 1 < self.a < self.N:
            raise ValueError(f"need 1 < a < N, got a={self.a}, N={self.N}")
        if not is_primitive_root(self.a, self.N):
            raise ValueError(f"a={self.a} is not a primitive root modulo {self.N}")

    @property
    def g(self):
        return gcd(self.m, self.N - 1)

    @property
    def b(self):
        return (self.N - 1) // self.g

    @classmethod
    def from_table(cls, N, m=42):
        if N not in TABULATED_MULTIPLIERS:
            raise KeyError(f"no tabulated multiplier for N={N}; choose a with best_multiplier")
        return cls(N, TABULATED_MULTIPLIERS[N], m)


def lcg_orbit(N, a):
    """Integer orbit ``a**t mod N`` for ``t = 0 .. N-2`` (one full period)."""
    period = N - 1
    orbit = np.ones(1, dtype=np.int64)
    while orbit.size < period:
        step = pow(a, int(orbit.size), N)
        orbit = np.concatenate([orbit, (orbit * step) % N])
    return orbit[:period]


def lattice_tableau_int(spec):
    """The N x m integer tableau: a zero row, then every m-tuple of the orbit once.

    Row ``r >= 1`` sits in block ``k = (r-1) // b`` at position ``j = (r-1) % b``
    and starts at orbit exponent ``j*m + k``; this is the plain scan of powers
    of ``a`` with block ``k`` multiplied by ``a**k``.
    """
    orbit = lcg_orbit(spec.N, spec.a)
    period = spec.N - 1
    r = np.arange(period)
    k, j = np.divmod(r, spec.b)
    start = (j * spec.m + k) % period
    idx = (start[:, None] + np.arange(spec.m)[None, :]) % period
    table = np.zeros((spec.N, spec.m), dtype=np.int64)
    table[1:] = orbit[idx]
    return table


def lattice_tableau(spec):
    """:func:`lattice_tableau_int` divided by ``N``."""
    return lattice_tableau_int(spec) / spec.N


def lattice_sequence(spec):
    """The tableau scanned row-major as a driving sequence."""
    return DrivingSequence(
        lattice_tableau(spec).ravel(), "lcg", {"N": spec.N, "a": spec.a, "m": spec.m}
    )


def overlapping_orbit_tuples(N, a, d):
    """The N-1 cyclic overlapping d-tuples of the orbit, divided by N."""
    orbit = lcg_orbit(N, a)
    idx = (np.arange(N - 1)[:, None] + np.arange(d)[None, :]) % (N - 1)
    return orbit[idx] / N


def best_multiplier(N, d=2, budget=None):
    """Primitive root minimizing the exact d-dimensional star discrepancy of orbit tuples.

    Ties go to the smallest root.  Returns ``(a, D*)``.
    """
    from wcud.discrepancy import star_discrepancy

    best = None
    for a in primitive_roots(N):
        kwargs = {} if budget is None else {"budget": budget}
        dstar = star_discrepancy(overlapping_orbit_tuples(N, a, d), **kwargs)
        if best is None or dstar < best[1]:
            best = (a, dstar)
    return best


def multiplier_for(N, m=42):
    """Tabulated multiplier when available, else the 2-d discrepancy-optimal root."""
    if N in TABULATED_MULTIPLIERS:
        return TABULATED_MULTIPLIERS[N]
    return best_multiplier(N, 2)[0]


def korobov_points(n, generator, s):
    """Rank-1 lattice ``{i * (1, g, g**2, ...) / n mod 1}`` with n points in s dims."""
    if n < 1 or s < 1:
        raise ValueError(f"need n >= 1 and s >= 1, got n={n}, s={s}")
    z = np.array([pow(generator, j, n) for j in range(s)], dtype=np.int64)
    return ((np.arange(n)[:, None] * z[None, :]) % n) / n


# -- randomizations --------------------------------------------------------

def random_permutation(n, rng):
    """Uniform random permutation of ``range(n)`` by Fisher-Yates."""
    if n < 1:
        raise ValueError(f"permutation length must be >= 1, got {n}")
    perm = np.arange(n)
    draws = rng.random(n - 1)
    for i in range(n - 1, 0, -1):
        j = int(draws[n - 1 - i] * (i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def random_rotation(m, rng):
    """Rotation vector of ``m`` IID uniforms."""
    if m < 1:
        raise ValueError(f"rotation width must be >= 1, got {m}")
    return rng.random(m)


def check_permutation(perm, n=None):
    perm = np.asarray(perm)
    if perm.ndim != 1 or (n is not None and perm.size != n):
        raise ValueError(f"permutation must have length {n}, got shape {perm.shape}")
    if not np.array_equal(np.sort(perm), np.arange(perm.size)):
        raise ValueError("not a bijection on 0..n-1")
    return perm.astype(np.int64)


def cp_rotate(u, U, m):
    """Cranley-Patterson rotation: ``v_i = u_i + U[i mod m]  (mod 1)``."""
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    U = np.asarray(U, dtype=np.float64).ravel()
    if U.size != m:
        raise ValueError(f"rotation vector has length {U.size}, expected m={m}")
    values = _as_values(u)
    shift = np.resize(U, values.size)
    v = values + shift
    v -= np.floor(v)
    # x + U can round up to exactly 1.0 when x is just below 1
    v[v >= 1.0] = 0.0
    meta = _meta(u) | {"m": m}
    method = "lcg-cp" if isinstance(u, DrivingSequence) and u.method == "lcg" else (
        u.method if isinstance(u, DrivingSequence) else "custom")
    return DrivingSequence(v, method, meta)


def liao_shuffle(A, tau):
    """Reorder the rows of ``A`` by ``tau`` (row i becomes ``A[tau[i]]``) and concatenate."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"point set must be 2-d, got shape {A.shape}")
    tau = check_permutation(tau, A.shape[0])
    return DrivingSequence(A[tau].ravel(), "liao", {"n": A.shape[0], "s": A.shape[1]})


def block_permute(u, r, sigma):
    """Permute within consecutive blocks of ``r``: ``out[i] = u[r*(i//r) + sigma[i % r]]``.

    A trailing partial block is passed through unchanged.
    """
    if r < 1:
        raise ValueError(f"block size must be >= 1, got {r}")
    sigma = check_permutation(sigma, r)
    values = _as_values(u)
    full = (values.size // r) * r
    out = values.copy()
    out[:full] = values[:full].reshape(-1, r)[:, sigma].ravel()
    return DrivingSequence(out, "block-perm", _meta(u) | {"r": r})


def insert_iid(v, m, p, w):
    """Insert one IID value at offset ``p`` into each block of ``m`` values of ``v``.

    The output has ``floor(N/m)`` blocks of ``m + 1``; block ``k`` holds
    ``v[k*m : k*m + p]``, then ``w[k]``, then ``v[k*m + p : (k+1)*m]``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0 <= p <= m:
        raise ValueError(f"offset p must be in 0..{m}, got {p}")
    values = _as_values(v)
    blocks = values.size // m
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.size < blocks:
        raise ValueError(f"need {blocks} IID values, got {w.size}")
    rows = values[: blocks * m].reshape(blocks, m)
    out = np.concatenate([rows[:, :p], w[:blocks, None], rows[:, p:]], axis=1)
    return DrivingSequence(out.ravel(), "iid-insert", _meta(v) | {"m": m, "p": p})


def iid_sequence(n, seed, label="iid", *indices):
    """``n`` pseudorandom units from the named sub-stream."""
    return DrivingSequence(iid_units(seed, label, n, *indices), "iid",
                           {"seed": seed, "label": label, "indices": indices})


# -- dump format -----------------------------------------------------------

def dump_sequence(u, path):
    """One unit per line, 17 significant digits."""
    with open(path, "w") as fh:
        for x in _as_values(u):
            fh.write(f"{x:.17g}\n")


def load_sequence(path, method="custom", meta: Optional[dict] = None):
    values = np.loadtxt(path, dtype=np.float64, ndmin=1)
    return DrivingSequence(values, method, meta or {})

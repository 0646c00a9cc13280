"""Exact local and star discrepancy, tuple extraction, and reference bounds.

Boxes are anchored at the origin and closed: ``[0, z] = prod_j [0, z_j]``.
The supremum defining the star discrepancy is attained on the critical grid
whose coordinates are the point coordinates plus 1.  At each grid corner the
scan evaluates the closed count (overshoot) and the count of points strictly
inside (the limit approached from below, undershoot).
"""

import csv
from dataclasses import dataclass, field
from math import ceil, log, pi

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from wcud.seqgen import DrivingSequence, totient, is_prime

#: Default ceiling on the number of grid corners a star-discrepancy scan may visit.
DEFAULT_BUDGET = 10**9

_DENSE_LIMIT = 2 * 10**7


class WorkBudgetExceeded(RuntimeError):
    """Exact star discrepancy would visit more corners than allowed."""


def as_points(P):
    """Validate a point set and return it as an ``(n, d)`` float array."""
    P = np.asarray(P, dtype=np.float64)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2 or P.shape[0] < 1 or P.shape[1] < 1:
        raise ValueError(f"point set must be (n, d) with n, d >= 1, got shape {P.shape}")
    if not np.all((P >= 0.0) & (P <= 1.0)):
        raise ValueError("point coordinates must lie in [0, 1]")
    return P


def _values(u):
    return u.values if isinstance(u, DrivingSequence) else np.asarray(u, dtype=np.float64).ravel()


def overlapping_tuples(u, d):
    """The ``n - d + 1`` overlapping d-tuples ``(u_i, ..., u_{i+d-1})``."""
    values = _values(u)
    if d < 1:
        raise ValueError(f"tuple dimension must be >= 1, got {d}")
    if d > values.size:
        raise ValueError(f"tuple dimension {d} exceeds sequence length {values.size}")
    return sliding_window_view(values, d)


def nonoverlapping_tuples(u, d):
    """The ``floor(n / d)`` disjoint consecutive d-tuples; the remainder is dropped."""
    values = _values(u)
    if d < 1:
        raise ValueError(f"tuple dimension must be >= 1, got {d}")
    if d > values.size:
        raise ValueError(f"tuple dimension {d} exceeds sequence length {values.size}")
    n = values.size // d
    return values[: n * d].reshape(n, d)


def local_discrepancy(P, z):
    """``|fraction of points in [0, z]  -  vol([0, z])|``."""
    P = as_points(P)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if z.shape != (P.shape[1],):
        raise ValueError(f"box anchor has dimension {z.size}, point set has {P.shape[1]}")
    if np.any((z < 0) | (z > 1)):
        raise ValueError("box anchor must lie in [0, 1]^d")
    inside = np.all(P <= z, axis=1).mean()
    return abs(inside - float(np.prod(z)))


def _star_1d(x):
    x = np.sort(x)
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def _grids(P):
    grids, index = [], []
    for j in range(P.shape[1]):
        g = np.unique(np.append(P[:, j], 1.0))
        grids.append(g)
        index.append(np.searchsorted(g, P[:, j]))
    return grids, np.stack(index, axis=1)


def _cumsum_all(H, axes):
    for ax in axes:
        H = np.cumsum(H, axis=ax)
    return H


def _shift_down(C):
    """``C[i1-1, i2-1, ...]`` with zeros where any index would be negative."""
    out = np.zeros_like(C)
    out[tuple(slice(1, None) for _ in range(C.ndim))] = C[tuple(slice(None, -1) for _ in range(C.ndim))]
    return out


def _volume(grids):
    V = np.ones([g.size for g in grids])
    for j, g in enumerate(grids):
        shape = [1] * len(grids)
        shape[j] = g.size
        V = V * g.reshape(shape)
    return V


def _star_dense(index, grids, n):
    shape = tuple(g.size for g in grids)
    H = np.zeros(shape, dtype=np.int64)
    np.add.at(H, tuple(index.T), 1)
    closed = _cumsum_all(H, range(H.ndim))
    opened = _shift_down(closed)
    V = _volume(grids)
    return float(max(np.max(closed / n - V), np.max(V - opened / n)))


def _star_slabs(index, grids, n):
    # sweep the first axis; keep a running histogram over the remaining ones
    rest = grids[1:]
    shape = tuple(g.size for g in rest)
    V_rest = _volume(rest)
    order = np.argsort(index[:, 0], kind="stable")
    index = index[order]
    bounds = np.searchsorted(index[:, 0], np.arange(grids[0].size + 1))
    H = np.zeros(shape, dtype=np.int64)
    prev_closed = np.zeros(shape, dtype=np.int64)
    best = 0.0
    for t, g0 in enumerate(grids[0]):
        lo, hi = bounds[t], bounds[t + 1]
        if hi > lo:
            np.add.at(H, tuple(index[lo:hi, 1:].T), 1)
        closed = _cumsum_all(H, range(H.ndim))
        opened = _shift_down(prev_closed)
        V = g0 * V_rest
        best = max(best, float(np.max(closed / n - V)), float(np.max(V - opened / n)))
        prev_closed = closed
    return best


def corner_count(P):
    """Number of critical-grid corners an exact scan of ``P`` visits."""
    P = as_points(P)
    return int(np.prod([np.unique(np.append(P[:, j], 1.0)).size for j in range(P.shape[1])],
                       dtype=object))


def star_discrepancy(P, budget=DEFAULT_BUDGET):
    """Exact star discrepancy ``sup_z |fraction in [0, z] - vol([0, z])|``.

    Raises :class:`WorkBudgetExceeded` when the critical grid has more than
    ``budget`` corners; subsample or lower the dimension in that case.
    """
    P = as_points(P)
    n, d = P.shape
    if d == 1:
        return _star_1d(P[:, 0])
    work = corner_count(P)
    if work > budget:
        raise WorkBudgetExceeded(
            f"exact scan needs {work:.3g} corners (n={n}, d={d}); budget is {budget:.3g}")
    grids, index = _grids(P)
    if work <= _DENSE_LIMIT:
        return _star_dense(index, grids, n)
    # the largest grid axis becomes the sweep axis to keep slabs small
    lead = int(np.argmax([g.size for g in grids]))
    perm = [lead] + [j for j in range(d) if j != lead]
    return _star_slabs(index[:, perm], [grids[j] for j in perm], n)


# -- reference bounds ------------------------------------------------------

def niederreiter_bound(N, s):
    """Upper bound on the s-dim star discrepancy of the N-1 tuples of a good LCG lattice."""
    if not is_prime(N) or N < 3:
        raise ValueError(f"N must be a prime >= 3, got {N}")
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    middle = 1 + (N - 2) * (s - 1) / totient(N - 1)
    return middle * ((2 / pi) * log(N) + 7 / 5) ** s / (N - 1)


def shuffled_box_bound(D, n, s, d):
    """Bound on ``|Pr(z_i in [0, z]) - vol([0, z])|`` for shuffled points regrouped into d-tuples.

    Requires a source star discrepancy ``D < 1/3`` and ``n > 3 * ceil((d-1)/s)``.
    """
    if s < 1 or d < 1:
        raise ValueError(f"s and d must be >= 1, got s={s}, d={d}")
    c = ceil((d - 1) / s)
    if not 0 <= D < 1 / 3:
        raise ValueError(f"source discrepancy must satisfy 0 <= D < 1/3, got {D}")
    if not n > 3 * c:
        raise ValueError(f"need n > 3*ceil((d-1)/s) = {3 * c}, got n={n}")
    return 1.5 * (2 ** (1 + c) - 1) * (D + c / n)


lemma3_bound = shuffled_box_bound


# -- diagnostic battery ----------------------------------------------------

@dataclass
class DiscrepancyReport:
    """Rows of ``(d, mode, n_tuples, d_star, rep)``; ``rep`` is 0 for fixed sequences."""

    rows: list = field(default_factory=list)

    def d_star(self, d, mode="overlap"):
        return [r["d_star"] for r in self.rows if r["d"] == d and r["mode"] == mode]

    def write_csv(self, path_or_file):
        header = ["d", "mode", "n_tuples", "d_star"]
        own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh)
            writer.writerow(header)
            for r in self.rows:
                writer.writerow([r["d"], r["mode"], r["n_tuples"], f"{r['d_star']:.17g}"])
        finally:
            if own:
                fh.close()


def wcud_diagnostic(u, dims=(1, 2, 3), reps=1, seed=0, modes=("overlap", "block"),
                    budget=DEFAULT_BUDGET):
    """Exact D* of overlapping and non-overlapping d-tuples for each ``d`` in ``dims``.

    ``u`` is either a fixed sequence or a callable ``factory(seed, rep)``
    returning one; for a callable, ``reps`` independent randomizations are
    scored.  A finite battery over a few ``d`` is a heuristic screen, not a
    proof of the limiting property.
    """
    report = DiscrepancyReport()
    sequences = [(0, u)] if not callable(u) else [(r, u(seed, r)) for r in range(reps)]
    extract = {"overlap": overlapping_tuples, "block": nonoverlapping_tuples}
    for rep, seq in sequences:
        for d in dims:
            for mode in modes:
                P = extract[mode](seq, d)
                report.rows.append({"d": d, "mode": mode, "n_tuples": P.shape[0],
                                    "d_star": star_discrepancy(P, budget), "rep": rep})
    return report

"""Finite-state Metropolis-Hastings driven by an arbitrary driving sequence.

A step consumes ``m`` consecutive units: the first ``m - 1`` build the
proposal, the last accepts it when ``u_m <= A(current -> candidate)``.
Proposals are realized by inversion of a row-stochastic table, so every
preimage cell is a finite union of boxes and the proposal is regular in the
Jordan sense.  Arbitrary user proposals cannot be checked for that.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from wcud.seqgen import DrivingSequence


@dataclass(frozen=True, eq=False)
class FiniteMhModel:
    """Target ``pi`` on states ``0..K-1`` and proposal table ``proposal[i, j] = p(i -> j)``.

    ``m`` units are consumed per step; the proposal reads ``u_1`` and ignores
    ``u_2 .. u_{m-1}``.
    """

    pi: np.ndarray
    proposal: np.ndarray
    m: int = 2

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=np.float64)
        P = np.asarray(self.proposal, dtype=np.float64)
        if pi.ndim != 1 or np.any(pi <= 0) or not np.isclose(pi.sum(), 1.0, atol=1e-12):
            raise ValueError("target must be strictly positive and sum to 1")
        K = pi.size
        if P.shape != (K, K) or np.any(P < 0) or not np.allclose(P.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError(f"proposal must be a row-stochastic {K}x{K} matrix")
        if np.any((P > 0) != (P.T > 0)):
            raise ValueError("proposal support must be symmetric for MH ratios to exist")
        if self.m < 2:
            raise ValueError(f"each step needs at least 2 units, got m={self.m}")
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "proposal", P)
        object.__setattr__(self, "_cum", np.cumsum(P, axis=1))

    @property
    def K(self):
        return self.pi.size

    def propose(self, state, u1):
        """Invert the cumulative proposal row at ``u1``."""
        cum = self._cum[state]
        j = int(np.searchsorted(cum, u1, side="right"))
        j = min(j, self.K - 1)
        # skip zero-probability cells that rounding can land on at the top end
        while self.proposal[state, j] == 0.0:
            j -= 1
        return j


def acceptance_probability(model, frm, to):
    """``min(1, pi(to) p(to->frm) / (pi(frm) p(frm->to)))``."""
    forward = model.proposal[frm, to]
    if forward <= 0:
        raise ValueError(f"proposal probability p({frm} -> {to}) is zero")
    ratio = model.pi[to] * model.proposal[to, frm] / (model.pi[frm] * forward)
    return min(1.0, ratio)


def mh_step(model, current, u, propose: Optional[Callable] = None):
    """One MH transition from ``current`` using the block ``u`` of ``m`` units."""
    if len(u) != model.m:
        raise ValueError(f"step needs {model.m} units, got {len(u)}")
    candidate = model.propose(current, u[0]) if propose is None else propose(current, u[:-1])
    if candidate == current:
        return current
    return candidate if u[-1] <= acceptance_probability(model, current, candidate) else current


@dataclass
class Trajectory:
    """States ``omega_1 .. omega_n`` (the start state is kept separately)."""

    states: np.ndarray
    start: int

    @property
    def n(self):
        return self.states.size

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("step,state\n")
            for i, s in enumerate(self.states, start=1):
                fh.write(f"{i},{s}\n")


def _values(driving):
    return driving.values if isinstance(driving, DrivingSequence) else np.asarray(driving, dtype=float)


def run_chain(model, driving, start, propose: Optional[Callable] = None):
    """Run ``floor(len / m)`` steps, consuming units in order; leftovers are unused."""
    values = _values(driving)
    n = values.size // model.m
    if n == 0:
        raise ValueError(f"driving sequence of length {values.size} is shorter than m={model.m}")
    blocks = values[: n * model.m].reshape(n, model.m)
    states = np.empty(n, dtype=np.int64)
    state = start
    for i in range(n):
        state = mh_step(model, state, blocks[i], propose)
        states[i] = state
    return Trajectory(states, start)


def empirical_distribution(trajectory, K):
    """Fraction of steps ``1..n`` spent in each state."""
    states = trajectory.states if isinstance(trajectory, Trajectory) else np.asarray(trajectory)
    if states.size == 0:
        raise ValueError("empty trajectory")
    return np.bincount(states, minlength=K) / states.size


@dataclass
class ConsistencyReport:
    sizes: list
    errors: list
    per_state: list
    eps: float

    @property
    def passed(self):
        return self.errors[-1] < self.eps

    @property
    def decreasing(self):
        return all(b <= a for a, b in zip(self.errors, self.errors[1:]))


def consistency_check(estimates, pi, eps, sizes=None):
    """Sup-norm errors of a series of estimates at increasing sample sizes."""
    estimates = [np.asarray(e, dtype=float) for e in estimates]
    if len(estimates) < 2:
        raise ValueError("need estimates at two or more sample sizes")
    pi = np.asarray(pi, dtype=float)
    per_state = [np.abs(e - pi) for e in estimates]
    errors = [float(p.max()) for p in per_state]
    return ConsistencyReport(list(sizes) if sizes is not None else list(range(len(errors))),
                             errors, per_state, eps)


def three_state_model(pi=(0.2, 0.3, 0.5), m=2):
    """Default demo model: ``pi`` on a 3-cycle with a symmetric nearest-neighbour proposal."""
    P = np.full((3, 3), 0.5)
    np.fill_diagonal(P, 0.0)
    return FiniteMhModel(np.asarray(pi, dtype=float), P, m)


# -- model files -----------------------------------------------------------

def load_model(path):
    """Read a finite model from plain text.

    Format (``#`` starts a comment)::

        K 3
        pi 0.2 0.3 0.5
        m 2                # optional
        proposal
        0.0 0.5 0.5
        0.5 0.0 0.5
        0.5 0.5 0.0
    """
    K = pi = None
    m = 2
    rows = []
    in_table = False
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *rest = line.split()
            try:
                if in_table:
                    rows.append([float(x) for x in line.split()])
                elif key == "K":
                    K = int(rest[0])
                elif key == "pi":
                    pi = [float(x) for x in rest]
                elif key == "m":
                    m = int(rest[0])
                elif key == "proposal":
                    in_table = True
                else:
                    raise ValueError(f"unknown key {key!r}")
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if K is None or pi is None or len(pi) != K or len(rows) != K:
        raise ValueError(f"{path}: need K, a length-K pi line and K proposal rows")
    return FiniteMhModel(np.array(pi), np.array(rows), m)


# -- acceptance-rejection --------------------------------------------------

@dataclass(frozen=True)
class ArSpec:
    """Target density ``f``, envelope density ``g`` with quantile ``g_inv``, and ``c``, f <= c g."""

    f: Callable
    g: Callable
    g_inv: Callable
    c: float

    def __post_init__(self):
        if not self.c >= 1.0:
            raise ValueError(f"envelope constant must be >= 1, got {self.c}")


class EnvelopeViolation(ValueError):
    pass


def _ar_trial(spec, v1, v2):
    y = spec.g_inv(v1)
    gy = spec.g(y)
    fy = spec.f(y)
    if gy <= 0:
        if fy > 0:
            raise EnvelopeViolation(f"f({y}) > 0 where the envelope vanishes")
        return y, False
    ratio = fy / (spec.c * gy)
    if ratio > 1.0 + 1e-12:
        raise EnvelopeViolation(f"f > c*g at y={y} (ratio {ratio})")
    return y, v2 <= ratio


def ar_sample(spec, primary, fallback):
    """One driving-sequence trial, then IID pairs from ``fallback`` until acceptance.

    Returns ``(y, pairs)`` where ``pairs`` counts fallback pairs used.
    ``fallback`` needs a ``next()`` method returning units.
    """
    y, ok = _ar_trial(spec, primary[0], primary[1])
    pairs = 0
    while not ok:
        y, ok = _ar_trial(spec, fallback.next(), fallback.next())
        pairs += 1
    return y, pairs


def uniform_envelope_spec(weights):
    """AR spec drawing from a pmf over ``0..K-1`` with a uniform envelope."""
    weights = np.asarray(weights, dtype=float)
    K = weights.size
    c = K * weights.max()
    return ArSpec(
        f=lambda y: weights[y],
        g=lambda y: 1.0 / K,
        g_inv=lambda v: min(int(v * K), K - 1),
        c=max(c, 1.0),
    )


def pmf_inverse(weights, v):
    """Inverse of the cumulative pmf at ``v``."""
    cum = np.cumsum(weights)
    j = min(int(np.searchsorted(cum, v, side="right")), len(weights) - 1)
    while weights[j] == 0.0:
        j -= 1
    return j


def pmf_coupling_value(weights, y, v_tilde):
    """The unit that inversion maps to ``y``: ``H(y-) + v_tilde * p(y)``."""
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    return cum[y] + v_tilde * weights[y]


def run_ar_chain(model, driving, start, fallback, offset=None, candidates: Optional[list] = None):
    """MH chain whose candidate is drawn from the proposal row by acceptance-rejection.

    Each step reads ``(v_y, v_accept, ..., u_mh)`` from blocks of ``model.m``
    units: the first two make the single driving-sequence AR trial, retries come
    from ``fallback`` and the last unit accepts or rejects the candidate.  Block
    positions listed in ``offset`` (e.g. an inserted IID slot) are skipped.
    Each step's candidate is appended to ``candidates`` when a list is given.
    Returns ``(trajectory, fallback_pairs)``.
    """
    values = _values(driving)
    n = values.size // model.m
    if n == 0:
        raise ValueError("driving sequence shorter than one step")
    blocks = values[: n * model.m].reshape(n, model.m)
    keep = [j for j in range(model.m) if offset is None or j not in offset]
    if len(keep) < 3:
        raise ValueError("AR chain needs at least 3 driving units per step")
    specs = [uniform_envelope_spec(model.proposal[s]) for s in range(model.K)]
    states = np.empty(n, dtype=np.int64)
    state, pairs = start, 0
    for i in range(n):
        u = blocks[i, keep]
        candidate, used = ar_sample(specs[state], u[:2], fallback)
        pairs += used
        if candidates is not None:
            candidates.append(candidate)
        if candidate != state and u[-1] <= acceptance_probability(model, state, candidate):
            state = candidate
        states[i] = state
    return Trajectory(states, start), pairs


def run_inversion_chain(model, driving, start, slot):
    """MH chain whose candidate inverts the proposal row at block position ``slot``.

    The last unit of each block accepts or rejects; other positions are unused.
    """
    values = _values(driving)
    n = values.size // model.m
    if n == 0:
        raise ValueError("driving sequence shorter than one step")
    blocks = values[: n * model.m].reshape(n, model.m)
    states = np.empty(n, dtype=np.int64)
    state = start
    for i in range(n):
        candidate = pmf_inverse(model.proposal[state], blocks[i, slot])
        if candidate != state and blocks[i, -1] <= acceptance_probability(model, state, candidate):
            state = candidate
        states[i] = state
    return Trajectory(states, start)

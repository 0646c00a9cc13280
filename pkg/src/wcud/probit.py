"""Albert-Chib Gibbs sampler for probit regression on the Finney vasoconstriction data.

One sweep consumes exactly 42 units: ``u[0:3]`` draw beta given Z, then
``u[3 + i]`` draws Z_i given beta for i = 0..38 in data order.  Units are
clamped to ``[1e-15, 1 - 1e-15]`` before inversion, so the zero row of a
lattice tableau stays finite.

The kernel works on a batch of independent chains at once (leading axis);
the single-chain functions are the batch of one.
"""

import csv
from dataclasses import dataclass
from importlib import resources

import numpy as np

from wcud.normal import inv_norm_cdf, trunc_norm_inverse
from wcud.seqgen import clamp_units

N_OBS = 39
N_BETA = 3
M = N_BETA + N_OBS  # units per Gibbs sweep

PARAM_NAMES = ["beta0", "beta1", "beta2"] + [f"z{i}" for i in range(1, N_OBS + 1)]


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ProbitData:
    """Design matrix ``X`` (intercept, volume, rate), responses ``Y`` and derived matrices."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        Y = np.asarray(self.Y, dtype=np.int64)
        if X.ndim != 2 or Y.shape != (X.shape[0],):
            raise DataError(f"X must be (n, p) and Y length n; got {X.shape} and {Y.shape}")
        if not np.all((Y == 0) | (Y == 1)):
            raise DataError("responses must be 0 or 1")
        XtX = X.T @ X
        try:
            np.linalg.cholesky(XtX)
        except np.linalg.LinAlgError:
            raise DataError("X'X is not positive definite") from None
        cov = np.linalg.inv(XtX)
        cov = 0.5 * (cov + cov.T)
        for name, value in [("X", X), ("Y", Y), ("cov", cov),
                            ("chol", np.linalg.cholesky(cov)),
                            ("hat", cov @ X.T)]:
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @classmethod
    def from_columns(cls, volume, rate, y):
        volume = np.asarray(volume, dtype=float)
        X = np.column_stack([np.ones_like(volume), volume, np.asarray(rate, dtype=float)])
        return cls(X, np.asarray(y))


def finney_path():
    return resources.files("wcud") / "data" / "finney.csv"


def load_finney(path=None, validate=True):
    """Read a ``volume,rate,y`` CSV into :class:`ProbitData`.

    With ``validate`` the file must hold exactly 39 records and the point
    ``(rate, volume) = (1.9, 0.95)`` must occur exactly twice, a known
    duplicate in the standard 39-record dataset.
    """
    path = finney_path() if path is None else path
    volume, rate, y = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["volume", "rate", "y"]:
            raise DataError(f"{path}: header must be 'volume,rate,y', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                v, r, resp = float(row[0]), float(row[1]), float(row[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparsable number in {row}") from None
            if resp not in (0.0, 1.0):
                raise DataError(f"{path}:{lineno}: response must be 0 or 1, got {row[2]}")
            volume.append(v)
            rate.append(r)
            y.append(int(resp))
    if validate:
        if len(y) != N_OBS:
            raise DataError(f"{path}: expected {N_OBS} records, found {len(y)}")
        anchor = sum(1 for v, r in zip(volume, rate) if np.isclose(r, 1.9) and np.isclose(v, 0.95))
        if anchor != 2:
            raise DataError(f"{path}: point (rate=1.9, volume=0.95) occurs {anchor} times, expected 2")
    return ProbitData.from_columns(volume, rate, y)


# -- Gibbs kernel ----------------------------------------------------------

def initial_state(data, batch=None):
    """beta = 0 and Z_i at the median of its truncated conditional given beta = 0."""
    z = trunc_norm_inverse(np.zeros(data.n), data.Y, np.full(data.n, 0.5))
    if batch is None:
        return ProbitState(np.zeros(data.p), z)
    return np.zeros((batch, data.p)), np.tile(z, (batch, 1))


def beta_update(Z, data, u):
    """``beta = (X'X)^-1 X'Z + L eps`` with ``eps_j = Phi^-1(u_j)`` and L lower Cholesky."""
    Z = np.asarray(Z, dtype=float)
    u = np.asarray(u, dtype=float)
    eps = inv_norm_cdf(clamp_units(u))
    return Z @ data.hat.T + eps @ data.chol.T


def gibbs_sweep(beta, Z, U, data):
    """Batched sweep: ``beta (R, 3)``, ``Z (R, 39)``, ``U (R, 42)`` -> new ``(beta, Z)``."""
    U = clamp_units(U)
    beta = beta_update(Z, data, U[:, :data.p])
    mu = beta @ data.X.T
    Z = trunc_norm_inverse(mu, data.Y[None, :], U[:, data.p:data.p + data.n])
    return beta, Z


@dataclass
class ProbitState:
    beta: np.ndarray
    Z: np.ndarray


def gibbs_step(state, data, u):
    """One sweep of a single chain from ``state`` using 42 units."""
    u = np.asarray(u, dtype=float)
    if u.shape != (data.p + data.n,):
        raise ValueError(f"a sweep needs {data.p + data.n} units, got {u.shape}")
    beta, Z = gibbs_sweep(state.beta[None, :], state.Z[None, :], u[None, :], data)
    return ProbitState(beta[0], Z[0])


def run_gibbs(data, driving, state=None, keep=False):
    """Run ``floor(len / 42)`` sweeps of one chain.

    Returns the running posterior means (beta then Z), and the list of states
    when ``keep`` is set.
    """
    values = driving.values if hasattr(driving, "values") else np.asarray(driving, dtype=float)
    m = data.p + data.n
    steps = values.size // m
    if steps == 0:
        raise ValueError("driving sequence shorter than one sweep")
    rows = values[: steps * m].reshape(1, steps, m)
    means, states = run_gibbs_batch(data, rows, state=state, keep=keep)
    return means[0], states


def run_gibbs_batch(data, rows, state=None, keep=False):
    """Run R chains in lockstep; ``rows`` is ``(R, steps, 42)``.

    Returns posterior means ``(R, 42)`` averaged over all steps (no burn-in)
    and, when ``keep`` is set, the per-step states of chain 0.
    """
    R, steps, _ = rows.shape
    if state is None:
        beta, Z = initial_state(data, R)
    else:
        beta = np.tile(state.beta, (R, 1))
        Z = np.tile(state.Z, (R, 1))
    total = np.zeros((R, data.p + data.n))
    trace = []
    for t in range(steps):
        beta, Z = gibbs_sweep(beta, Z, rows[:, t, :], data)
        total[:, :data.p] += beta
        total[:, data.p:] += Z
        if keep:
            trace.append(ProbitState(beta[0].copy(), Z[0].copy()))
    return total / steps, trace


@dataclass
class PosteriorEstimate:
    beta: np.ndarray
    Z: np.ndarray

    def as_vector(self):
        return np.concatenate([self.beta, self.Z])


def posterior_means(trajectory, burn=0):
    """Componentwise means over steps ``burn + 1 .. n`` of a list of states."""
    if not 0 <= burn < len(trajectory):
        raise ValueError(f"burn={burn} leaves no states out of {len(trajectory)}")
    kept = trajectory[burn:]
    return PosteriorEstimate(np.mean([s.beta for s in kept], axis=0),
                             np.mean([s.Z for s in kept], axis=0))


def write_trace(trajectory, path):
    """CSV with one column per parameter."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PARAM_NAMES)
        for s in trajectory:
            writer.writerow([f"{x:.17g}" for x in np.concatenate([s.beta, s.Z])])

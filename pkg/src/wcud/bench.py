"""Replication study: IID vs rotated-lattice vs shuffled-lattice driving of the probit Gibbs sampler.

Each replication runs one chain of N sweeps (42 units each) and records the
posterior means of the 42 parameters.  Replications are grouped in fixed
chunks that run as vectorized batches; the chunking depends only on the
config, so results are identical for any number of workers.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import stats

from wcud.probit import M, PARAM_NAMES, load_finney, run_gibbs_batch
from wcud.rng import substream
from wcud.seqgen import (
    DrivingSequence,
    LatticeSpec,
    TABULATED_MULTIPLIERS,
    lattice_tableau,
    multiplier_for,
    random_permutation,
    random_rotation,
)

BENCH_METHODS = ("iid", "lcg-cp", "liao")
DESK_NS = (1021, 4093)
FULL_NS = (1021, 2039, 4093, 8191, 16381)


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple = BENCH_METHODS
    Ns: tuple = DESK_NS
    reps: int = 100
    seed: int = 1
    burn: int = 0
    chunk: int = 25
    workers: int = 1
    data_path: Optional[str] = None
    multipliers: dict = field(default_factory=lambda: dict(TABULATED_MULTIPLIERS))

    def __post_init__(self):
        if self.reps < 2:
            raise ValueError(f"need at least 2 replications, got {self.reps}")
        if self.burn != 0:
            raise ValueError("posterior means average every sweep; burn-in is not supported")
        for method in self.methods:
            if method not in BENCH_METHODS:
                raise ValueError(f"unknown method {method!r}; expected one of {BENCH_METHODS}")
        for N in self.Ns:
            if any(m != "iid" for m in self.methods):
                LatticeSpec(N, self.multiplier(N), M)

    @classmethod
    def full(cls, **kwargs):
        return cls(Ns=FULL_NS, reps=300, **kwargs)

    def multiplier(self, N):
        return self.multipliers[N] if N in self.multipliers else multiplier_for(N, M)


@lru_cache(maxsize=8)
def _tableau(N, a):
    table = lattice_tableau(LatticeSpec(N, a, M))
    table.flags.writeable = False
    return table


def _driver_rows(method, N, a, seed, rep):
    if method == "iid":
        return substream(seed, "iid", N, rep).random((N, M))
    table = _tableau(N, a)
    shift = random_rotation(M, substream(seed, "rotation", N, rep))
    rows = table + shift
    rows -= np.floor(rows)
    rows[rows >= 1.0] = 0.0
    if method == "liao":
        rows = rows[random_permutation(N, substream(seed, "permutation", N, rep))]
    return rows


def build_driver(config, method, N, rep):
    """Driving sequence of ``N * 42`` units for one replication.

    ``lcg-cp`` rotates every tableau row by one fresh 42-dim shift;
    ``liao`` additionally reorders the rotated rows by a fresh permutation.
    """
    if method not in BENCH_METHODS:
        raise ValueError(f"unknown method {method!r}")
    a = None if method == "iid" else config.multiplier(N)
    rows = _driver_rows(method, N, a, config.seed, rep)
    return DrivingSequence(rows.ravel(), method,
                           {"N": N, "a": a, "m": M, "seed": config.seed, "rep": rep})


@dataclass
class ReplicationReport:
    """Posterior-mean estimates, one row per replication, columns in ``PARAM_NAMES`` order."""

    method: str
    N: int
    estimates: np.ndarray

    @property
    def reps(self):
        return self.estimates.shape[0]

    @property
    def mean(self):
        return self.estimates.mean(axis=0)

    @property
    def variance(self):
        return self.estimates.var(axis=0, ddof=1)


@lru_cache(maxsize=4)
def _data(path):
    return load_finney(path)


def _run_chunk(args):
    config, method, N, reps = args
    data = _data(config.data_path)
    a = None if method == "iid" else config.multiplier(N)
    rows = np.stack([_driver_rows(method, N, a, config.seed, r) for r in reps])
    means, _ = run_gibbs_batch(data, rows)
    return means


def run_replications(config, method, N):
    """R independent chains of N sweeps; deterministic in ``(config, method, N)``."""
    chunks = [range(lo, min(lo + config.chunk, config.reps))
              for lo in range(0, config.reps, config.chunk)]
    tasks = [(config, method, N, chunk) for chunk in chunks]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    return ReplicationReport(method, N, np.concatenate(parts, axis=0))


def run_study(config):
    """Reports keyed by ``(method, N)``."""
    return {(method, N): run_replications(config, method, N)
            for N in config.Ns for method in config.methods}


# -- summaries -------------------------------------------------------------

def significance_threshold(reps):
    """Upper 0.975 point of F(R-1, R-1); ratios inside (1/t, t) are not significant."""
    if reps == 300:
        return 1.25
    return float(stats.f.ppf(0.975, reps - 1, reps - 1))


@dataclass
class VrfTable:
    method: str
    baseline: str
    N: int
    ratios: np.ndarray
    threshold: float

    @property
    def significant(self):
        return (self.ratios >= self.threshold) | (self.ratios <= 1.0 / self.threshold)

    @property
    def beta(self):
        return self.ratios[:3]

    @property
    def z(self):
        return self.ratios[3:]


def variance_reduction(baseline, method):
    """Per-parameter ``Var_baseline / Var_method``."""
    if baseline.N != method.N or baseline.reps != method.reps:
        raise ValueError(f"reports differ in N or R: ({baseline.N}, {baseline.reps}) vs "
                         f"({method.N}, {method.reps})")
    if baseline.estimates.shape[1] != method.estimates.shape[1]:
        raise ValueError("reports cover different parameter sets")
    return VrfTable(method.method, baseline.method, method.N,
                    baseline.variance / method.variance, significance_threshold(method.reps))


def quantile_summary(x):
    """min, Q0.25, Q0.75, max with linear interpolation between order statistics."""
    x = np.asarray(x, dtype=float)
    return {"min": float(x.min()), "q25": float(np.quantile(x, 0.25)),
            "q75": float(np.quantile(x, 0.75)), "max": float(x.max())}


def bias_summary(reports, pairs=None):
    """Quantiles of paired differences of replication-averaged means, pooled over N.

    ``reports`` maps ``(method, N)`` to :class:`ReplicationReport`.  The
    default pairs are every ordered combination of distinct methods.
    """
    methods = sorted({m for m, _ in reports}, key=lambda m: BENCH_METHODS.index(m)
                     if m in BENCH_METHODS else len(BENCH_METHODS))
    Ns = sorted({N for _, N in reports})
    if pairs is None:
        pairs = [(a, b) for i, b in enumerate(methods) for a in methods[i + 1:]]
    out = {}
    for a, b in pairs:
        diffs = []
        for N in Ns:
            ra, rb = reports[(a, N)], reports[(b, N)]
            if ra.estimates.shape[1] != rb.estimates.shape[1]:
                raise ValueError(f"parameter sets differ for {a} and {b} at N={N}")
            diffs.append(ra.mean - rb.mean)
        out[(a, b)] = quantile_summary(np.concatenate(diffs))
    return out


def z_vrf_summary(vrfs):
    """min, quartiles, mean and max of latent-variable VRFs pooled over tables."""
    z = np.concatenate([t.z for t in vrfs])
    return {"min": float(z.min()), "q25": float(np.quantile(z, 0.25)),
            "median": float(np.median(z)), "mean": float(z.mean()),
            "q75": float(np.quantile(z, 0.75)), "max": float(z.max())}


def all_vrfs(reports, baseline="iid"):
    tables = []
    for (method, N), rep in sorted(reports.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        if method != baseline and (baseline, N) in reports:
            tables.append(variance_reduction(reports[(baseline, N)], rep))
    return tables


# -- output ----------------------------------------------------------------

def _fmt(x):
    return f"{x:.17g}"


def write_replications_csv(reports, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "N", "reps", "param", "mean", "variance"])
        for (method, N), rep in sorted(reports.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            for name, mu, var in zip(PARAM_NAMES, rep.mean, rep.variance):
                w.writerow([method, N, rep.reps, name, _fmt(mu), _fmt(var)])


def write_vrf_csv(tables, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["N", "method", "baseline", "param", "vrf", "significant"])
        for t in tables:
            for name, r, sig in zip(PARAM_NAMES, t.ratios, t.significant):
                w.writerow([t.N, t.method, t.baseline, name, _fmt(r), int(sig)])


def write_bias_csv(summary, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "minus", "min", "q25", "q75", "max"])
        for (a, b), q in summary.items():
            w.writerow([a, b] + [_fmt(q[k]) for k in ("min", "q25", "q75", "max")])


def write_z_summary_csv(tables, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "min", "q25", "median", "mean", "q75", "max"])
        for method in sorted({t.method for t in tables}, key=BENCH_METHODS.index):
            s = z_vrf_summary([t for t in tables if t.method == method])
            w.writerow([method] + [_fmt(s[k]) for k in ("min", "q25", "median", "mean", "q75", "max")])


def plot_z_variance(reports, N, path):
    """Sampling variance of each Z_i posterior-mean estimate against the estimate itself.

    Returns the abscissae plotted for each method.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "wcud"
    fig, ax = plt.subplots(figsize=(6, 4))
    styles = {"iid": "--", "lcg-cp": "-", "liao": "-."}
    plotted = {}
    for method in BENCH_METHODS:
        rep = reports.get((method, N))
        if rep is None:
            continue
        z_mean, z_var = rep.mean[3:], rep.variance[3:]
        order = np.argsort(z_mean)
        ax.plot(z_mean[order], z_var[order], styles[method], marker="o", ms=3, label=method)
        plotted[method] = z_mean[order]
    ax.set_yscale("log")
    ax.set_xlabel("posterior mean of Z_i")
    ax.set_ylabel("variance of estimate")
    ax.set_title(f"N = {N}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return plotted


def emit_outputs(reports, out_dir):
    """Write the study CSVs and the Z-variance plot; returns the paths written."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    tables = all_vrfs(reports)
    paths = {name: os.path.join(out_dir, name) for name in
             ("replications.csv", "vrf.csv", "z_vrf_summary.csv", "bias.csv", "z_variance.svg")}
    try:
        write_replications_csv(reports, paths["replications.csv"])
        write_vrf_csv(tables, paths["vrf.csv"])
        write_z_summary_csv(tables, paths["z_vrf_summary.csv"])
        write_bias_csv(bias_summary(reports) if reports else {}, paths["bias.csv"])
        if reports:
            plot_z_variance(reports, max(N for _, N in reports), paths["z_variance.svg"])
        else:
            del paths["z_variance.svg"]
    except OSError as exc:
        raise OSError(f"writing outputs to {out_dir}: {exc}") from exc
    return paths


def with_workers(config, workers):
    return replace(config, workers=workers)

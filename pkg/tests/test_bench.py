import csv

import numpy as np
import pytest
from scipy import stats

from wcud import bench
from wcud.probit import PARAM_NAMES, load_finney, run_gibbs_batch
from wcud.rng import iid_units

SMALL = bench.ExperimentConfig(Ns=(1021,), reps=4, chunk=2)


def test_build_driver_shapes_and_determinism():
    iid = bench.build_driver(SMALL, "iid", 1021, 0)
    assert len(iid) == 42_882
    a = bench.build_driver(SMALL, "lcg-cp", 1021, 3)
    b = bench.build_driver(SMALL, "lcg-cp", 1021, 3)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, bench.build_driver(SMALL, "lcg-cp", 1021, 4).values)
    with pytest.raises(ValueError):
        bench.build_driver(SMALL, "sobol", 1021, 0)


def test_liao_is_a_row_reordering_of_lcg_cp():
    cp = bench.build_driver(SMALL, "lcg-cp", 1021, 2).rows(42)
    liao = bench.build_driver(SMALL, "liao", 1021, 2).rows(42)
    assert not np.array_equal(cp, liao)
    key = lambda A: A[np.lexsort(A.T[::-1])]
    assert np.array_equal(key(cp), key(liao))


def test_config_validation():
    with pytest.raises(ValueError):
        bench.ExperimentConfig(reps=1)
    with pytest.raises(ValueError):
        bench.ExperimentConfig(methods=("iid", "halton"))
    with pytest.raises(ValueError):
        bench.ExperimentConfig(Ns=(1000,))
    full = bench.ExperimentConfig.full()
    assert full.reps == 300 and full.Ns == bench.FULL_NS


def test_report_shape_and_chunk_independence():
    rep = bench.run_replications(SMALL, "lcg-cp", 1021)
    assert rep.estimates.shape == (4, 42)
    assert rep.mean.shape == rep.variance.shape == (42,)
    # chunk size is part of the config: batched BLAS may round differently, nothing more
    other = bench.run_replications(bench.ExperimentConfig(Ns=(1021,), reps=4, chunk=3), "lcg-cp", 1021)
    assert np.allclose(rep.estimates, other.estimates, rtol=0, atol=1e-12)
    again = bench.run_replications(SMALL, "lcg-cp", 1021)
    assert np.array_equal(rep.estimates, again.estimates)


def test_forced_equal_substreams_give_zero_variance(monkeypatch):
    real = bench._driver_rows
    monkeypatch.setattr(bench, "_driver_rows", lambda method, N, a, seed, rep: real(method, N, a, seed, 0))
    rep = bench.run_replications(bench.ExperimentConfig(Ns=(1021,), reps=2), "iid", 1021)
    assert np.all(rep.variance == 0)


def test_iid_variance_matches_effective_sample_size():
    rep = bench.run_replications(bench.ExperimentConfig(methods=("iid",), Ns=(1021,), reps=100),
                                 "iid", 1021)
    # asymptotic variance sigma^2_chain of beta0 from 20 long independent chains
    chains, steps = 20, 20_000
    rows = iid_units(99, "long", chains * steps * 42).reshape(chains, steps, 42)
    means, _ = run_gibbs_batch(load_finney(), rows)
    sigma2 = steps * means[:, 0].var(ddof=1)
    ratio = rep.variance[0] / (sigma2 / 1021)
    assert 1 / 3 <= ratio <= 3


def test_variance_reduction_arithmetic():
    base = bench.ReplicationReport("iid", 1021, np.array([[0.0], [np.sqrt(20.0)]]))
    meth = bench.ReplicationReport("lcg-cp", 1021, np.array([[0.0], [np.sqrt(2.0)]]))
    assert base.variance[0] == pytest.approx(10.0)
    assert bench.variance_reduction(base, meth).ratios[0] == pytest.approx(10.0)
    assert bench.variance_reduction(base, base).ratios[0] == 1.0
    with pytest.raises(ValueError):
        bench.variance_reduction(base, bench.ReplicationReport("liao", 4093, meth.estimates))


def test_significance_threshold():
    assert bench.significance_threshold(300) == 1.25
    assert bench.significance_threshold(100) == pytest.approx(stats.f.ppf(0.975, 99, 99))
    assert bench.significance_threshold(100) > 1.25


def test_quantile_convention():
    q = bench.quantile_summary([1, 2, 3, 4])
    assert q == {"min": 1.0, "q25": 1.75, "q75": 3.25, "max": 4.0}


def test_bias_self_comparison_is_zero():
    rep = bench.ReplicationReport("iid", 1021, np.arange(84.0).reshape(2, 42))
    out = bench.bias_summary({("iid", 1021): rep}, pairs=[("iid", "iid")])
    assert all(v == 0 for v in out[("iid", "iid")].values())


def _parse(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_emit_outputs(tmp_path):
    empty = bench.emit_outputs({}, tmp_path / "empty")
    for name in ("replications.csv", "vrf.csv", "bias.csv", "z_vrf_summary.csv"):
        assert len(_parse(empty[name])) == 1

    rng = np.random.default_rng(0)
    reports = {(m, 1021): bench.ReplicationReport(m, 1021, rng.normal(size=(5, 42)))
               for m in bench.BENCH_METHODS}
    paths = bench.emit_outputs(reports, tmp_path / "out")
    rows = _parse(paths["replications.csv"])
    assert rows[0] == ["method", "N", "reps", "param", "mean", "variance"]
    got = {(r[0], r[3]): (float(r[4]), float(r[5])) for r in rows[1:]}
    for (m, _), rep in reports.items():
        for i, name in enumerate(PARAM_NAMES):
            assert got[(m, name)] == (rep.mean[i], rep.variance[i])
    assert paths["z_variance.svg"].endswith(".svg")
    assert open(paths["z_variance.svg"]).read().lstrip().startswith("<?xml")
    plotted = bench.plot_z_variance(reports, 1021, tmp_path / "f.svg")
    for m, x in plotted.items():
        assert np.array_equal(np.sort(x), np.sort(reports[(m, 1021)].mean[3:]))
        assert x.size == 39


def test_emit_outputs_reports_path_on_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        bench.emit_outputs({}, blocker / "sub")

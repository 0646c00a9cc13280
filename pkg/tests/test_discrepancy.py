from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wcud import discrepancy as disc
from wcud import seqgen
from wcud.rng import substream


def brute_star(P):
    """Reference scan: every corner of the grid ``coords ∪ {1}``, closed and open counts."""
    P = np.asarray(P, dtype=float)
    n, d = P.shape
    grids = [np.unique(np.append(P[:, j], 1.0)) for j in range(d)]
    best = 0.0
    for z in product(*grids):
        z = np.array(z)
        vol = float(np.prod(z))
        closed = np.all(P <= z, axis=1).sum() / n
        opened = np.all(P < z, axis=1).sum() / n
        best = max(best, closed - vol, vol - opened)
    return best


def test_tuple_extraction():
    u = [0.1, 0.2, 0.3]
    assert disc.overlapping_tuples(u, 2).tolist() == [[0.1, 0.2], [0.2, 0.3]]
    assert disc.overlapping_tuples(u, 3).tolist() == [[0.1, 0.2, 0.3]]
    assert disc.overlapping_tuples(u, 1).ravel().tolist() == u
    with pytest.raises(ValueError):
        disc.overlapping_tuples(u, 4)
    v = [0.1, 0.2, 0.3, 0.4, 0.5]
    assert disc.nonoverlapping_tuples(v, 2).tolist() == [[0.1, 0.2], [0.3, 0.4]]
    assert np.array_equal(disc.nonoverlapping_tuples(v, 1), disc.overlapping_tuples(v, 1))
    with pytest.raises(ValueError):
        disc.nonoverlapping_tuples(v, 0)


def test_local_discrepancy_examples():
    assert disc.local_discrepancy([[0.5, 0.5]], [1, 1]) == 0
    assert disc.local_discrepancy([[0.25, 0.25], [0.75, 0.75]], [0.5, 0.5]) == pytest.approx(0.25)
    assert disc.local_discrepancy([[0.5, 0.5]], [0.2, 0.2]) == pytest.approx(0.04)
    with pytest.raises(ValueError):
        disc.local_discrepancy([[0.5, 0.5]], [0.2])


def test_star_discrepancy_examples():
    assert disc.star_discrepancy([[0.5]]) == 0.5
    n = 10
    assert disc.star_discrepancy(((2 * np.arange(1, n + 1) - 1) / (2 * n))[:, None]) == pytest.approx(0.05)
    assert disc.star_discrepancy([[0.5, 0.5]]) == pytest.approx(0.75)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda d: arrays(np.float64, st.tuples(st.integers(1, 12), st.just(d)),
                     elements=st.sampled_from([0.0, 0.125, 0.25, 0.5, 0.625, 0.75, 0.9]))))
def test_star_matches_brute_force_with_ties(P):
    assert disc.star_discrepancy(P) == pytest.approx(brute_star(P), abs=1e-15)


@pytest.mark.parametrize("n,d,seed", [(40, 2, 0), (25, 3, 1), (12, 4, 2), (60, 2, 3)])
def test_star_matches_brute_force_random(n, d, seed):
    P = substream(seed, "pts").random((n, d))
    assert disc.star_discrepancy(P) == pytest.approx(brute_star(P), abs=1e-15)


def test_dense_and_slab_paths_agree(monkeypatch):
    P = substream(9, "pts").random((150, 3))
    dense = disc.star_discrepancy(P)
    monkeypatch.setattr(disc, "_DENSE_LIMIT", 0)
    assert disc.star_discrepancy(P) == dense


def test_star_against_fine_grid_lower_bound():
    # any grid point gives a lower bound; a 2000x2000 grid gets within 1/1000 of the sup
    P = substream(4, "pts").random((30, 2))
    g = np.linspace(0, 1, 2001)
    below = (P[:, 0][:, None] <= g[None, :]).astype(np.int64)
    counts = below.T @ (P[:, 1][:, None] <= g[None, :]).astype(np.int64)
    grid_max = np.max(np.abs(counts / 30 - np.outer(g, g)))
    exact = disc.star_discrepancy(P)
    assert grid_max <= exact + 1e-12
    assert exact - grid_max < 2 / 2000 + 1 / 30


def test_work_budget_refusal():
    P = substream(0, "pts").random((100, 3))
    with pytest.raises(disc.WorkBudgetExceeded):
        disc.star_discrepancy(P, budget=1000)


def test_niederreiter_bound_examples():
    assert disc.niederreiter_bound(7, 1) == pytest.approx((1 / 6) * ((2 / np.pi) * np.log(7) + 1.4))
    assert disc.niederreiter_bound(7, 1) == pytest.approx(0.43979, abs=2e-5)
    N = 1021
    expected = (1 + (N - 2) / 256) * ((2 / np.pi) * np.log(N) + 1.4) ** 2 / (N - 1)
    assert disc.niederreiter_bound(N, 2) == pytest.approx(expected)


def test_shuffled_box_bound_examples():
    assert disc.lemma3_bound is disc.shuffled_box_bound
    assert disc.shuffled_box_bound(0.02, 50, 3, 1) == pytest.approx(0.03)
    assert disc.shuffled_box_bound(0.01, 100, 4, 5) == pytest.approx(0.09)
    with pytest.raises(ValueError):
        disc.shuffled_box_bound(0.34, 100, 4, 5)
    with pytest.raises(ValueError):
        disc.shuffled_box_bound(0.01, 3, 4, 5)


def test_diagnostic_constant_sequence():
    for n in (10, 100):
        rep = disc.wcud_diagnostic(np.full(n, 0.5), dims=(1,), modes=("overlap",))
        assert rep.d_star(1) == [0.5]


def test_diagnostic_iid_kolmogorov():
    n = 10_000
    below = [disc.wcud_diagnostic(lambda s, r: seqgen.iid_sequence(n, s, "iid", r),
                                  dims=(1,), reps=20, seed=0, modes=("overlap",)).d_star(1)]
    below = np.array(below[0]) < 1.63 / np.sqrt(n)
    assert below.mean() >= 0.95


def test_diagnostic_lattice_211_under_bound():
    a, _ = seqgen.best_multiplier(211)
    seq = seqgen.lattice_sequence(seqgen.LatticeSpec(211, a, 2))
    rep = disc.wcud_diagnostic(seq, dims=(2,), modes=("overlap",))
    assert rep.d_star(2)[0] <= disc.niederreiter_bound(211, 2)


def test_report_csv(tmp_path):
    rep = disc.wcud_diagnostic(np.linspace(0, 0.99, 30), dims=(1, 2))
    path = tmp_path / "r.csv"
    rep.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "d,mode,n_tuples,d_star"
    assert len(lines) == 5
    assert float(lines[1].split(",")[3]) == rep.rows[0]["d_star"]

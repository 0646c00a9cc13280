from collections import Counter
from itertools import permutations
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wcud import seqgen
from wcud.rng import UnitStream, substream


def brute_totient(n):
    return sum(1 for k in range(1, n + 1) if gcd(k, n) == 1)


def brute_order(a, N):
    x, k = a % N, 1
    while x != 1:
        x = x * a % N
        k += 1
    return k


@pytest.mark.parametrize("n", [1, 2, 7, 12, 97, 360, 1020, 4092])
def test_totient_matches_brute_force(n):
    assert seqgen.totient(n) == brute_totient(n)


def test_totient_examples():
    assert seqgen.totient(1) == 1
    assert seqgen.totient(1021) == 1020
    assert seqgen.totient(1020) == 256
    with pytest.raises(ValueError):
        seqgen.totient(0)


def test_primitive_root_examples():
    assert seqgen.is_primitive_root(3, 7)
    assert not seqgen.is_primitive_root(2, 7)
    for N, a in seqgen.TABULATED_MULTIPLIERS.items():
        assert seqgen.is_primitive_root(a, N)
    with pytest.raises(ValueError):
        seqgen.is_primitive_root(2, 8)


@pytest.mark.parametrize("N", [7, 11, 31, 101, 211])
def test_primitive_roots_by_order(N):
    roots = seqgen.primitive_roots(N)
    assert roots == [a for a in range(1, N) if brute_order(a, N) == N - 1]
    assert len(roots) == seqgen.totient(N - 1)


def test_tableau_small_example():
    spec = seqgen.LatticeSpec(7, 3, 2)
    assert (spec.g, spec.b) == (2, 3)
    table = seqgen.lattice_tableau_int(spec)
    assert table[0].tolist() == [0, 0]
    assert table[1:].tolist() == [[1, 3], [2, 6], [4, 5], [3, 2], [6, 4], [5, 1]]
    assert np.allclose(seqgen.lattice_tableau(spec), table / 7)


def test_tabulated_block_structure():
    for N, a in seqgen.TABULATED_MULTIPLIERS.items():
        spec = seqgen.LatticeSpec(N, a, 42)
        assert spec.g * spec.b == N - 1
    assert seqgen.LatticeSpec(1021, 65, 42).g == 6
    assert seqgen.LatticeSpec(4093, 235, 42).g == 6


def _orbit_tuples(N, a, m):
    orbit, x = [], 1
    for _ in range(N - 1):
        orbit.append(x)
        x = x * a % N
    return Counter(tuple(orbit[(i + j) % (N - 1)] for j in range(m)) for i in range(N - 1))


@pytest.mark.parametrize("N,m", [(7, 2), (11, 3), (13, 4), (31, 6), (37, 4), (61, 5), (97, 12)])
def test_tableau_rows_are_all_orbit_tuples(N, m):
    a = seqgen.primitive_roots(N)[0]
    table = seqgen.lattice_tableau_int(seqgen.LatticeSpec(N, a, m))
    assert Counter(map(tuple, table[1:].tolist())) == _orbit_tuples(N, a, m)


@pytest.mark.parametrize("N,a", [(4093, 235), (65537, 3), (1_000_003, 2)])
def test_orbit_matches_scalar_recurrence(N, a):
    orbit = seqgen.lcg_orbit(N, a)
    for t in range(0, N - 1, max(1, (N - 1) // 5000)):
        assert orbit[t] == pow(a, t, N)
    assert len(set(orbit.tolist())) == N - 1


def test_lattice_spec_rejects_bad_input():
    with pytest.raises(ValueError):
        seqgen.LatticeSpec(8, 3, 2)
    with pytest.raises(ValueError):
        seqgen.LatticeSpec(7, 2, 2)
    with pytest.raises(ValueError):
        seqgen.LatticeSpec(7, 3, 0)
    with pytest.raises(KeyError):
        seqgen.LatticeSpec.from_table(211)


def test_cp_rotate_examples():
    u = seqgen.DrivingSequence([0.1, 0.2, 0.3, 0.4])
    assert np.array_equal(seqgen.cp_rotate(u, [0.0, 0.0], 2).values, u.values)
    assert np.allclose(seqgen.cp_rotate([0.7], [0.6], 1).values, [0.3])
    assert np.allclose(seqgen.cp_rotate(u, [0.5, 0.9], 2).values, [0.6, 0.1, 0.8, 0.3])
    with pytest.raises(ValueError):
        seqgen.cp_rotate(u, [], 0)


def test_cp_rotate_never_returns_one():
    v = seqgen.cp_rotate([1 - 2**-53], [2**-54 + 2**-53], 1)
    assert v.values[0] < 1.0


def test_liao_shuffle():
    A = np.array([[0.1, 0.2], [0.3, 0.4]])
    assert seqgen.liao_shuffle(A, [0, 1]).values.tolist() == [0.1, 0.2, 0.3, 0.4]
    assert seqgen.liao_shuffle(A, [1, 0]).values.tolist() == [0.3, 0.4, 0.1, 0.2]
    with pytest.raises(ValueError):
        seqgen.liao_shuffle(A, [0, 1, 2])


def test_block_permute():
    u = [0.1, 0.2, 0.3, 0.4]
    assert seqgen.block_permute(u, 2, [1, 0]).values.tolist() == [0.2, 0.1, 0.4, 0.3]
    assert seqgen.block_permute(u, 4, [0, 1, 2, 3]).values.tolist() == u
    with pytest.raises(ValueError):
        seqgen.block_permute(u, 2, [0, 0])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(0, 40), st.randoms(use_true_random=False))
def test_block_permute_inverse_roundtrip(r, nblocks, rnd):
    sigma = list(range(r))
    rnd.shuffle(sigma)
    inv = np.argsort(sigma)
    u = np.linspace(0, 0.99, r * nblocks + 1)
    back = seqgen.block_permute(seqgen.block_permute(u, r, sigma), r, inv)
    assert np.array_equal(back.values, u)


def test_insert_iid():
    v = [0.1, 0.2, 0.3, 0.4]
    out = seqgen.insert_iid(v, 2, 2, [0.8, 0.9])
    assert out.values.tolist() == [0.1, 0.2, 0.8, 0.3, 0.4, 0.9]
    assert seqgen.insert_iid(v, 2, 0, [0.8, 0.9]).values.tolist() == [0.8, 0.1, 0.2, 0.9, 0.3, 0.4]
    with pytest.raises(ValueError):
        seqgen.insert_iid(v, 2, 3, [0.8, 0.9])


def test_random_permutation_examples():
    assert seqgen.random_permutation(1, substream(0, "p")).tolist() == [0]
    a = seqgen.random_permutation(50, substream(3, "p"))
    b = seqgen.random_permutation(50, substream(3, "p"))
    assert np.array_equal(a, b)
    assert sorted(a.tolist()) == list(range(50))
    with pytest.raises(ValueError):
        seqgen.random_permutation(0, substream(0, "p"))


def test_random_permutation_uniform_on_three():
    rng = substream(11, "chi2")
    counts = Counter(tuple(seqgen.random_permutation(3, rng)) for _ in range(60000))
    assert set(counts) == set(permutations(range(3)))
    sigma = np.sqrt(60000 * (1 / 6) * (5 / 6))
    for c in counts.values():
        assert abs(c - 10000) <= 3 * sigma


def test_driving_sequence_validation():
    with pytest.raises(ValueError):
        seqgen.DrivingSequence([0.5, 1.0])
    with pytest.raises(ValueError):
        seqgen.DrivingSequence([])
    with pytest.raises(ValueError):
        seqgen.DrivingSequence([0.5], method="sobol")
    seq = seqgen.DrivingSequence([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        seq.values[0] = 0.5


def test_dump_load_roundtrip(tmp_path):
    seq = seqgen.lattice_sequence(seqgen.LatticeSpec(211, 2, 3))
    seq = seqgen.cp_rotate(seq, substream(1, "r").random(3), 3)
    path = tmp_path / "seq.txt"
    seqgen.dump_sequence(seq, path)
    assert np.array_equal(seqgen.load_sequence(path).values, seq.values)


def test_unit_stream_is_reproducible():
    a = UnitStream(5, "fallback", 1, block=7)
    b = UnitStream(5, "fallback", 1, block=1000)
    xs = [a.next() for _ in range(20)]
    ys = list(b.take(20))
    assert xs == ys
    assert a.consumed == 20


def test_substreams_differ_by_label_and_index():
    assert substream(1, "a").random() != substream(1, "b").random()
    assert substream(1, "a", 0).random() != substream(1, "a", 1).random()
    with pytest.raises(ValueError):
        substream(-1, "a")


def test_best_multiplier_small():
    a, d = seqgen.best_multiplier(31)
    assert seqgen.is_primitive_root(a, 31)
    assert 0 < d < 1


def test_korobov_points():
    P = seqgen.korobov_points(8, 3, 2)
    assert P.shape == (8, 2)
    assert np.allclose(P[1], [1 / 8, 3 / 8])
    assert sorted(P[:, 1].tolist()) == [i / 8 for i in range(8)]

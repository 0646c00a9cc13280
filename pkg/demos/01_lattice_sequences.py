"""
Lattice driving sequences
=========================

A full-period LCG with prime modulus N visits every nonzero residue once.
Writing out all of its m-tuples, plus a row of zeros, gives an N x m
tableau whose rows are a lattice rule.  Scanned row by row it becomes a
driving sequence of N*m units for an MCMC sampler that uses m units per step.
"""

import numpy as np

from wcud import seqgen
from wcud.rng import substream

# the smallest interesting case: N = 7, a = 3 and pairs (m = 2)
spec = seqgen.LatticeSpec(7, 3, 2)
print("g = gcd(m, N-1) =", spec.g, " rows per block b =", spec.b)
print(seqgen.lattice_tableau_int(spec))

# Table-sized example: N = 1021 with the tabulated multiplier, 42 units per row
spec = seqgen.LatticeSpec.from_table(1021)
lattice = seqgen.lattice_sequence(spec)
print(f"\nN={spec.N}, a={spec.a}: {len(lattice)} units, {spec.g} blocks of {spec.b} rows")

# Cranley-Patterson rotation: one uniform shift per column, mod 1
shift = seqgen.random_rotation(42, substream(1, "rotation"))
rotated = seqgen.cp_rotate(lattice, shift, 42)
print("rotated first row:", np.round(rotated.rows(42)[0, :5], 4), "...")

# Liao's scheme reorders the rotated rows at random
tau = seqgen.random_permutation(spec.N, substream(1, "permutation"))
shuffled = seqgen.liao_shuffle(rotated.rows(42), tau)
print("shuffled first row:", np.round(shuffled.rows(42)[0, :5], 4), "...")

# every column of the tableau is an exact grid on [0, 1): the marginals are perfect
col = np.sort(lattice.rows(42)[:, 0])
print("column 0 equals {0, 1/N, ..., (N-1)/N}:", np.allclose(col, np.arange(spec.N) / spec.N))

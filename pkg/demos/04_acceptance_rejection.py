"""
Acceptance-rejection with IID padding
=====================================

When a proposal is drawn by acceptance-rejection, a step may need any
number of uniforms.  The driving sequence supplies one trial; retries come
from an IID stream.  Replacing the retries by a single unit that inversion
would map to the same outcome gives a chain driven by a fixed-width sequence
with one IID unit inserted per step, and that chain follows the same path.
"""

import numpy as np

from wcud import mcmc, seqgen
from wcud.rng import UnitStream, iid_units, substream

N = 4093
P = np.full((3, 3), 0.5)
np.fill_diagonal(P, 0.0)
model = mcmc.FiniteMhModel(np.array([0.3, 0.33, 0.37]), P, m=4)

v = seqgen.cp_rotate(seqgen.lattice_sequence(seqgen.LatticeSpec.from_table(N, 3)),
                     substream(1, "rotation").random(3), 3)
driving = seqgen.insert_iid(v, 3, 2, iid_units(1, "insert", N))

candidates = []
ar, pairs = mcmc.run_ar_chain(model, driving, 0, UnitStream(1), offset={2}, candidates=candidates)
print(f"AR chain: {ar.n} steps, {pairs} fallback pairs, pi_hat {mcmc.empirical_distribution(ar, 3)}")

inserted = mcmc.run_inversion_chain(model, driving, 0, slot=2)
print(f"inverting the inserted IID unit: pi_hat {mcmc.empirical_distribution(inserted, 3)}")

prev = np.concatenate([[0], ar.states[:-1]])
vt = iid_units(1, "coupling", N)
w = [mcmc.pmf_coupling_value(P[s], c, t) for s, c, t in zip(prev, candidates, vt)]
coupled = mcmc.run_inversion_chain(model, seqgen.insert_iid(v, 3, 2, w), 0, slot=2)
print("coupled inversion chain reproduces the AR path:", np.array_equal(coupled.states, ar.states))

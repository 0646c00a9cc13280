"""
Metropolis-Hastings on three states
===================================

A finite chain driven by a lattice sequence instead of IID uniforms.  Each
step reads two units: one picks the neighbour to propose, the other accepts
or rejects.  The fraction of time in each state converges to the target.
"""

import numpy as np

from wcud import mcmc, seqgen
from wcud.rng import iid_units

model = mcmc.three_state_model()
print("target:", model.pi)

for N in (211, 1021, 4093, 16381):
    spec = seqgen.LatticeSpec(N, seqgen.multiplier_for(N, model.m), model.m)
    lattice = mcmc.run_chain(model, seqgen.lattice_sequence(spec), start=0)
    iid = mcmc.run_chain(model, iid_units(1, "iid", N * model.m, N), start=0)
    err_l = np.abs(mcmc.empirical_distribution(lattice, 3) - model.pi).max()
    err_i = np.abs(mcmc.empirical_distribution(iid, 3) - model.pi).max()
    print(f"N={N:6d}  sup error lattice {err_l:.5f}   iid {err_i:.5f}")

"""
Probit regression by Gibbs sampling
===================================

The Finney vasoconstriction data: 39 trials, response 1 when constriction
occurred, covariates log volume and log rate.  Data augmentation alternates
beta | Z (a 3-d normal) and Z | beta (39 truncated normals), 42 units a sweep.
"""

import numpy as np

from wcud import probit, seqgen
from wcud.rng import substream

data = probit.load_finney()
print(f"{data.n} observations, {data.Y.sum()} responses")

N = 4093
lattice = seqgen.lattice_sequence(seqgen.LatticeSpec.from_table(N))
driving = seqgen.cp_rotate(lattice, substream(1, "rotation").random(42), 42)
means, trace = probit.run_gibbs(data, driving, keep=True)
print("posterior means of beta from one rotated-lattice chain:", np.round(means[:3], 3))

# the latent Z_i keep the sign of Y_i at every sweep
ok = all(np.all((s.Z >= 0) == (data.Y == 1)) for s in trace)
print(f"{len(trace)} sweeps, sign constraint held throughout: {ok}")

iid = seqgen.iid_sequence(N * 42, 1)
means_iid, _ = probit.run_gibbs(data, iid)
print("same length IID chain:", np.round(means_iid[:3], 3))

"""
Exact star discrepancy
======================

The star discrepancy of n points is the worst gap, over boxes anchored at
the origin, between the fraction of points in the box and its volume.  The
supremum is attained on the grid of point coordinates, so it can be
computed exactly; the cost is the number of grid corners.
"""

import numpy as np

from wcud import discrepancy as disc
from wcud import seqgen
from wcud.rng import iid_units

# a good LCG: overlapping pairs of the orbit against the classical bound
a, dstar = seqgen.best_multiplier(211)
print(f"N=211: best primitive root {a}, D* of pairs {dstar:.4f}, "
      f"bound {disc.niederreiter_bound(211, 2):.4f}")

# lattice driving sequence versus IID of the same length
lattice = seqgen.lattice_sequence(seqgen.LatticeSpec(1021, 65, 3))
iid = iid_units(1, "demo", len(lattice))
for name, u in [("lattice", lattice), ("iid", iid)]:
    # d=3 would need about 3000**3 corners, past the default budget
    rep = disc.wcud_diagnostic(u, dims=(1, 2), modes=("overlap",))
    print(f"{name:8s}", "  ".join(f"d={r['d']}: {r['d_star']:.4f}" for r in rep.rows))

# the work budget refuses scans that would not finish
P = iid_units(2, "big", 3 * 5000).reshape(-1, 3)
print(f"5000 points in 3-d need {disc.corner_count(P):.2e} corners")
try:
    disc.star_discrepancy(P, budget=1e8)
except disc.WorkBudgetExceeded as exc:
    print("refused:", exc)

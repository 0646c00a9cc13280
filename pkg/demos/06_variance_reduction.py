"""
Variance reduction study
========================

Repeat the probit chain many times with fresh randomization and compare the
spread of the posterior-mean estimates across methods.  This is the desk
scale version (R=100, N in {1021, 4093}); pass --full for R=300 over all five
tabulated N.
"""

import argparse

import numpy as np

from wcud import bench

parser = argparse.ArgumentParser()
parser.add_argument("--full", action="store_true")
parser.add_argument("--reps", type=int, default=100)
parser.add_argument("--out-dir", default="bench_out")
args = parser.parse_args()

config = bench.ExperimentConfig.full() if args.full else bench.ExperimentConfig(reps=args.reps)
reports = bench.run_study(config)

for t in bench.all_vrfs(reports):
    sig = int(t.significant.sum())
    print(f"N={t.N:5d} {t.method:6s}  beta VRF {np.round(t.beta, 1)}  "
          f"Z VRF median {np.median(t.z):.1f} max {t.z.max():.1f}  ({sig}/42 significant)")

for (a, b), q in bench.bias_summary(reports).items():
    print(f"{a} - {b}: " + "  ".join(f"{k} {v:+.4f}" for k, v in q.items()))

paths = bench.emit_outputs(reports, args.out_dir)
print("wrote", ", ".join(paths.values()))

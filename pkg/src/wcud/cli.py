"""Command line: ``wcud gen | disc | finite | probit | bench``."""

import argparse
import sys

import numpy as np

from wcud import bench, discrepancy, mcmc, probit, seqgen
from wcud.rng import substream


def _sequence(method, N, a, m, seed):
    if method == "iid":
        return seqgen.iid_sequence(N * m, seed, "iid", N, 0)
    a = a or seqgen.multiplier_for(N, m)
    spec = seqgen.LatticeSpec(N, a, m)
    lat = seqgen.lattice_sequence(spec)
    if method == "lcg":
        return lat
    shift = seqgen.random_rotation(m, substream(seed, "rotation", N, 0))
    rotated = seqgen.cp_rotate(lat, shift, m)
    if method == "lcg-cp":
        return seqgen.DrivingSequence(rotated.values, "lcg-cp", rotated.meta | {"seed": seed})
    tau = seqgen.random_permutation(N, substream(seed, "permutation", N, 0))
    shuffled = seqgen.liao_shuffle(rotated.rows(m), tau)
    return seqgen.DrivingSequence(shuffled.values, "liao",
                                  {"N": N, "a": a, "m": m, "seed": seed})


def cmd_gen(args):
    seq = _sequence(args.method, args.N, args.a, args.m, args.seed)
    if args.out:
        seqgen.dump_sequence(seq, args.out)
    else:
        for x in seq.values:
            sys.stdout.write(f"{x:.17g}\n")


def cmd_disc(args):
    data = np.loadtxt(args.input, delimiter=",", ndmin=2)
    report = discrepancy.DiscrepancyReport()
    if data.shape[1] > 1:
        report.rows.append({"d": data.shape[1], "mode": "points", "n_tuples": data.shape[0],
                            "d_star": discrepancy.star_discrepancy(data, args.budget), "rep": 0})
    else:
        seq = seqgen.DrivingSequence(data[:, 0])
        dims = [int(d) for d in args.dims.split(",")]
        report = discrepancy.wcud_diagnostic(seq, dims, modes=(args.mode,), budget=args.budget)
    report.write_csv(args.out or sys.stdout)


def cmd_finite(args):
    model = mcmc.load_model(args.model) if args.model else mcmc.three_state_model()
    seq = _sequence(args.method, args.N, args.a, model.m, args.seed)
    traj = mcmc.run_chain(model, seq, start=0)
    est = mcmc.empirical_distribution(traj, model.K)
    print(f"steps={traj.n}")
    print("state,pi,pi_hat,abs_error")
    for k in range(model.K):
        print(f"{k},{model.pi[k]:.6g},{est[k]:.6g},{abs(est[k] - model.pi[k]):.3g}")
    print(f"sup_error={np.abs(est - model.pi).max():.6g}")
    if args.out:
        traj.write_csv(args.out)


def cmd_probit(args):
    data = probit.load_finney(args.data)
    seq = _sequence(args.method, args.N, args.a, probit.M, args.seed)
    means, trace = probit.run_gibbs(data, seq, keep=bool(args.out))
    print(",".join(probit.PARAM_NAMES))
    print(",".join(f"{x:.17g}" for x in means))
    if args.out:
        probit.write_trace(trace, args.out)


def cmd_bench(args):
    methods = tuple(args.methods.split(","))
    kwargs = dict(methods=methods, seed=args.seed, workers=args.workers, chunk=args.chunk,
                  data_path=args.data)
    if args.full:
        config = bench.ExperimentConfig.full(**kwargs)
    else:
        Ns = tuple(int(n) for n in args.Ns.split(","))
        config = bench.ExperimentConfig(Ns=Ns, reps=args.reps, **kwargs)
    reports = bench.run_study(config)
    paths = bench.emit_outputs(reports, args.out_dir)
    for tab in bench.all_vrfs(reports):
        b = ", ".join(f"{x:.1f}" for x in tab.beta)
        print(f"N={tab.N} {tab.method} vs {tab.baseline}: beta VRF [{b}], "
              f"median Z VRF {np.median(tab.z):.1f}, max Z VRF {tab.z.max():.1f}")
    for path in paths.values():
        print(f"wrote {path}")


def build_parser():
    parser = argparse.ArgumentParser(prog="wcud", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit a driving sequence, one unit per line")
    p.add_argument("--method", choices=["iid", "lcg", "lcg-cp", "liao"], default="lcg-cp")
    p.add_argument("--N", type=int, default=1021)
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--m", type=int, default=42)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("disc", help="exact star discrepancy of a sequence or point set")
    p.add_argument("--input", required=True,
                   help="CSV: one column is a sequence, d columns a point set")
    p.add_argument("--dims", default="1,2,3")
    p.add_argument("--mode", choices=["overlap", "block"], default="overlap")
    p.add_argument("--budget", type=float, default=discrepancy.DEFAULT_BUDGET)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_disc)

    p = sub.add_parser("finite", help="3-state MH consistency demo")
    p.add_argument("--N", type=int, default=1021)
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--method", choices=["iid", "lcg", "lcg-cp", "liao"], default="lcg-cp")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--model", default=None, help="plain-text model file")
    p.add_argument("--out", default=None, help="trajectory CSV")
    p.set_defaults(func=cmd_finite)

    p = sub.add_parser("probit", help="one Gibbs chain on the Finney data")
    p.add_argument("--method", choices=["iid", "lcg-cp", "liao"], default="lcg-cp")
    p.add_argument("--N", type=int, default=1021)
    p.add_argument("--a", type=int, default=None)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None, help="per-sweep trace CSV")
    p.set_defaults(func=cmd_probit)

    p = sub.add_parser("bench", help="replication study and VRF tables")
    p.add_argument("--methods", default="iid,lcg-cp,liao")
    p.add_argument("--Ns", default="1021,4093")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out-dir", default="bench_out")
    p.add_argument("--full", action="store_true", help="R=300 over all five tabulated N")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--chunk", type=int, default=25)
    p.add_argument("--data", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, KeyError, OSError, discrepancy.WorkBudgetExceeded) as exc:
        print(f"wcud {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

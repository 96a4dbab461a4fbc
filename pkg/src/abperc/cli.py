"""Command-line front end: closed-form evaluators, the analytic bound
ledger, point-sample dumps, and the seeded experiment kinds.

    abperc eta --u 1 --s 1 --dim 2
    abperc alpha --c 0.5 --dim 2
    abperc isolated --n 10000 --c 0.8 --beta 1 --reps 200 --seed 1 --out w.jsonl
    abperc summarize --in w.jsonl --beta 1

Scalar subcommands print one JSON object; experiment subcommands stream
JSONL records (with --out) and print the summary JSON.
"""

import argparse
import json
import sys

from . import analysis, geometry, harness, observables, pointprocess


def _common(parser):
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--n", type=float)
    parser.add_argument("--c", type=float)
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--lambda", dest="lam", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--r", type=float)
    parser.add_argument("--window", type=float, help="window side L")
    parser.add_argument("--reps", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str)
    parser.add_argument("--resume", action="store_true")
    parser.add_argument("--parallel", type=int, default=1)
    parser.add_argument("--format", dest="fmt", choices=("jsonl", "csv"),
                        default="jsonl")
    parser.add_argument("--timing", action="store_true",
                        help="record wall time per replication (breaks "
                             "byte-level rerun reproducibility)")
    return parser


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _run(args, config):
    _, summary = harness.run_experiment(
        config, out=args.out, resume=args.resume, parallel=args.parallel,
        timing=args.timing, fmt=args.fmt)
    _emit(summary)


def main(argv=None):
    top = argparse.ArgumentParser(prog="abperc", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        return _common(sub.add_parser(name, **kwargs))

    p = add("eta", help="normalised lens volume eta(u, s)")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--s", type=float, required=True)

    p = add("alpha", help="connectivity constant alpha(c)")
    p.add_argument("--tol", type=float, default=1e-6)

    p = add("c0", help="mean-stabilising constant c0(d)")
    p.add_argument("--tol", type=float, default=1e-6)

    add("cell-area", help="lattice cell volume a(d, r)")

    p = add("bounds", help="analytic bound ledger as JSON")
    p.add_argument("--p", type=float)
    p.add_argument("--lambda-c-r", dest="lambda_c_r", type=float)
    p.add_argument("--lambda-c-2r", dest="lambda_c_2r", type=float)

    p = add("sample", help="dump one Poisson sample (CSV or JSON)")
    p.add_argument("--torus", action="store_true")

    add("isolated", help="isolated-node counts at r_n(c, beta)")
    add("mn", help="largest nearest-neighbour radius experiment")

    p = add("connectivity", help="connectivity threshold alpha*_n")
    p.add_argument("--tol", type=float, default=1e-3)

    add("percolation", help="planar crossing experiment at (lambda, mu, r, L)")

    p = add("lattice", help="site-percolation crossing experiment")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--kind", choices=("triangular", "z_star"),
                   default="triangular")

    p = add("word", help="word-occurrence experiment (alternating prefix)")
    p.add_argument("--lambdas", type=str, default=None,
                   help="comma-separated intensities, e.g. 2,2")
    p.add_argument("--radii", type=str, default=None,
                   help="comma-separated radii, e.g. 1,1")
    p.add_argument("--prefix-len", dest="prefix_len", type=int, default=20)

    p = add("sweep", help="repeat an experiment over one parameter grid")
    p.add_argument("--base", required=True,
                   choices=("isolated", "mn", "connectivity", "percolation",
                            "lattice", "word"))
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated values, e.g. 1,2,4")
    p.add_argument("--p", type=float)
    p.add_argument("--size", type=int)

    p = add("summarize", help="summarise JSONL records (stdin or --in)")
    p.add_argument("--in", dest="infile", type=str)
    p.add_argument("--r-threshold", dest="r_threshold", type=float)

    args = top.parse_args(argv)
    cmd = args.command

    if cmd == "eta":
        _emit({"u": args.u, "s": args.s, "d": args.dim,
               "eta": geometry.eta(args.u, args.s, args.dim),
               "lower_bound": geometry.eta_lower_bound(args.u, args.s, args.dim)
               if args.s <= 2 ** args.dim * args.u else 0.0})
    elif cmd == "alpha":
        if args.c is None:
            top.error("alpha requires --c")
        val = geometry.alpha_of_c(args.c, args.dim, tol=args.tol)
        _emit({"c": args.c, "d": args.dim, "alpha": val,
               "upper_bound": geometry.alpha_upper_bound(args.c, args.dim)})
    elif cmd == "c0":
        _emit({"d": args.dim, "c0": geometry.c_zero(args.dim, tol=args.tol)})
    elif cmd == "cell-area":
        if args.r is None:
            top.error("cell-area requires --r")
        _emit({"d": args.dim, "r": args.r,
               "cell_area": geometry.cell_area(args.dim, args.r)})
    elif cmd == "bounds":
        if args.lam is None or args.r is None:
            top.error("bounds requires --lambda and --r")
        ledger = analysis.build_bound_ledger(
            args.lam, args.r, args.dim, mu=args.mu, p=args.p,
            lambda_c_r=args.lambda_c_r, lambda_c_2r=args.lambda_c_2r)
        _emit(ledger.to_dict())
    elif cmd == "sample":
        if args.n is None:
            top.error("sample requires --n (intensity)")
        side = args.window if args.window else 1.0
        win = pointprocess.Window.cube(side, args.dim, wrap=args.torus)
        ps = pointprocess.sample_poisson(win, args.n, args.seed)
        if args.out and args.fmt == "csv":
            pointprocess.to_csv(ps, args.out)
        elif args.out:
            pointprocess.save_json(ps, args.out)
        else:
            _emit(pointprocess.to_json_dict(ps))
        return 0
    elif cmd in ("isolated", "mn"):
        if args.n is None or args.c is None:
            top.error(f"{cmd} requires --n and --c")
        _run(args, harness.ExperimentConfig(
            kind=cmd, d=args.dim, n=args.n, c=args.c, beta=args.beta,
            r=args.r, reps=args.reps, master_seed=args.seed))
    elif cmd == "connectivity":
        if args.n is None or args.c is None:
            top.error("connectivity requires --n and --c")
        _run(args, harness.ExperimentConfig(
            kind="connectivity", d=args.dim, n=args.n, c=args.c,
            beta=args.beta, r=args.r, reps=args.reps,
            master_seed=args.seed, tol=args.tol))
    elif cmd == "percolation":
        if None in (args.lam, args.mu, args.r, args.window):
            top.error("percolation requires --lambda --mu --r --window")
        _run(args, harness.ExperimentConfig(
            kind="percolation", d=args.dim, lam=args.lam, mu=args.mu,
            r=args.r, L=args.window, reps=args.reps, master_seed=args.seed))
    elif cmd == "lattice":
        _run(args, harness.ExperimentConfig(
            kind="lattice", d=args.dim, p=args.p, size=args.size,
            lattice=args.kind, reps=args.reps, master_seed=args.seed))
    elif cmd == "word":
        lambdas = [float(v) for v in (args.lambdas or "2,2").split(",")]
        radii = [float(v) for v in (args.radii or "1,1").split(",")]
        _run(args, harness.ExperimentConfig(
            kind="word", d=args.dim, lambdas=lambdas, radii=radii,
            L=args.window or 50.0, prefix_len=args.prefix_len,
            reps=args.reps, master_seed=args.seed))
    elif cmd == "sweep":
        base = dict(kind=args.base, d=args.dim, n=args.n, c=args.c,
                    beta=args.beta, r=args.r, lam=args.lam, mu=args.mu,
                    p=args.p, L=args.window, size=args.size,
                    reps=args.reps, master_seed=args.seed)
        values = [float(v) for v in args.values.split(",")]
        if args.param in ("size", "reps", "prefix_len"):
            values = [int(v) for v in values]
        base[args.param] = values[0]
        base = {k: v for k, v in base.items() if v is not None}
        cfg = harness.ExperimentConfig(**base)
        results = harness.run_sweep(cfg, args.param, values,
                                    out_prefix=args.out,
                                    parallel=args.parallel,
                                    timing=args.timing)
        _emit(results)
    elif cmd == "summarize":
        if args.infile:
            records = harness.read_jsonl(args.infile)
        else:
            records = [harness.TrialRecord.from_json_line(line)
                       for line in sys.stdin if line.strip()]
        _emit(harness.summarize(records, beta=args.beta,
                                r_threshold=args.r_threshold))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit status: 0 on success, 1 when a solver stops without meeting its
target, 2 on invalid input or usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import bench, io
from .applications import max_margin, polytope_distance
from .baselines import dense_qp_oracle
from .errors import EgmGeomError, InvalidInputError
from .geometry import LabeledDataset
from .mecp import solve_mecp
from .meb import solve_meb_additive, solve_meb_multiplicative
from .qp import BACKEND, DiagQpInstance, solve_diag_qp

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INVALID = 0, 1, 2


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return parse


def _add_solver_opts(p, eps_default):
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=_positive(float), default=eps_default)
    p.add_argument("--max-iters", type=_positive(int), default=100_000)
    p.add_argument("--trace", help="write k,J,D,gap,mu,cert_gap rows as CSV")
    p.add_argument("--output", help="result JSON path (stdout if omitted)")
    p.add_argument("--check", choices=("full", "sampled", "off"), default="full",
                   help="excessive-gap invariant checking")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="egmgeom", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a standard Gaussian point set")
    g.add_argument("--n", type=_positive(int), required=True)
    g.add_argument("--d", type=_positive(int), required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--labeled", action="store_true",
                   help="append labels sign(x_1), giving data separable through the origin")
    g.add_argument("--output", required=True)

    m = sub.add_parser("meb", help="minimum enclosing ball")
    _add_solver_opts(m, 1e-3)
    m.add_argument("--mode", choices=("add", "mult"), default="mult")
    m.add_argument("--l-policy", choices=("certified", "classical"), default="certified")
    m.add_argument("--tight-l", action="store_true",
                   help="use the certified tangent-space L (the default)")

    c = sub.add_parser("mecp", help="minimum enclosing convex polytope")
    _add_solver_opts(c, 1e-3)
    c.add_argument("--shape", required=True)
    c.add_argument("--q1", type=_positive(float), default=None,
                   help="radius of the primal ball (default: data radius)")
    c.add_argument("--l-policy", choices=("certified", "classical"), default="certified")

    pd = sub.add_parser("polydist", help="distance from the origin to a convex hull")
    _add_solver_opts(pd, 1e-6)

    mg = sub.add_parser("margin", help="hard-margin separating direction")
    _add_solver_opts(mg, 1e-3)

    b = sub.add_parser("bench", help="iteration-count experiment on Gaussian data")
    b.add_argument("--grid", choices=sorted(bench.GRIDS), default="table1")
    b.add_argument("--solvers", default="ours,bc")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--eps", type=_positive(float), default=1e-3)
    b.add_argument("--replicates", type=_positive(int), default=5)
    b.add_argument("--threads", type=_positive(int), default=1)
    b.add_argument("--n-scale", type=_positive(float), default=1.0,
                   help="multiply every grid n by this factor")
    b.add_argument("--max-iters", type=_positive(int), default=100_000)
    b.add_argument("--output", required=True, help="CSV path")
    b.add_argument("--json", help="also write records and metadata as JSON")

    q = sub.add_parser("qp-check", help="fuzz the QP kernel against exhaustive enumeration")
    q.add_argument("--n", type=_positive(int), default=6)
    q.add_argument("--trials", type=_positive(int), default=100)
    q.add_argument("--seed", type=int, default=0)
    return ap


def _setup_logging():
    if os.environ.get("EGMGEOM_LOG", "").lower() == "debug":
        logging.basicConfig(level=logging.DEBUG, format="%(name)s: %(message)s")


def _emit(args, payload, trace_rows=None) -> None:
    if getattr(args, "trace", None) and trace_rows is not None:
        io.write_trace(args.trace, trace_rows)
    io.write_json(args.output, payload)


def cmd_gen(args):
    ps = bench.gen_gaussian(args.n, args.d, args.seed)
    if args.labeled:
        y = np.where(ps.points[:, 0] >= 0, 1.0, -1.0)
        io.write_labeled(args.output, LabeledDataset(ps.points, y))
    else:
        io.write_points(args.output, ps)
    return EXIT_OK


def cmd_meb(args):
    ps = io.read_points(args.input)
    policy = "certified" if args.tight_l else args.l_policy
    solve = solve_meb_additive if args.mode == "add" else solve_meb_multiplicative
    r = solve(ps, args.eps, args.max_iters, l_policy=policy, check=args.check,
              trace=bool(args.trace))
    _emit(args, r.to_json(), r.trace)
    return EXIT_OK if r.converged else EXIT_NOT_CONVERGED


def cmd_mecp(args):
    ps = io.read_points(args.input)
    shape = io.read_shape(args.shape)
    r = solve_mecp(shape, ps, args.eps, args.q1, args.max_iters, l_policy=args.l_policy,
                   check=args.check, trace=bool(args.trace))
    if r.clamp_engaged:
        print("warning: the Q1 ball constraint was active during the solve", file=sys.stderr)
    _emit(args, r.to_json(), r.trace)
    return EXIT_OK if r.converged else EXIT_NOT_CONVERGED


def cmd_polydist(args):
    r = polytope_distance(io.read_points(args.input), args.eps, args.max_iters,
                          check=args.check, trace=bool(args.trace))
    _emit(args, r.to_json(), r.trace)
    return EXIT_OK if r.converged else EXIT_NOT_CONVERGED


def cmd_margin(args):
    r = max_margin(io.read_labeled(args.input), args.eps, args.max_iters,
                   check=args.check, trace=bool(args.trace))
    if not r.separable:
        print("warning: data not separable through the origin (margin <= 0)", file=sys.stderr)
    _emit(args, r.to_json(), r.trace)
    return EXIT_OK if r.converged else EXIT_NOT_CONVERGED


def cmd_bench(args):
    solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    cfg = bench.BenchConfig(
        grid=bench.GRIDS[args.grid], eps_mult=args.eps, replicates=args.replicates,
        seed=args.seed, solvers=solvers, threads=args.threads, n_scale=args.n_scale,
        max_iters=args.max_iters,
    )
    records = bench.run_bench(cfg)
    bench.write_bench_csv(args.output, records)
    if args.json:
        io.write_json(args.json, {
            "metadata": bench.bench_metadata(cfg),
            "records": [vars(r) for r in records],
        })
    for r in records:
        for f in r.failures:
            print(f"{r.solver} n={r.n} d={r.d}: {f}", file=sys.stderr)
    return EXIT_OK


def _random_qp(rng, n):
    d2 = rng.uniform(0.1, 3.0, n)
    m = 2.0 * rng.standard_normal(n)
    l = rng.standard_normal(n)
    u = l + rng.uniform(0.1, 2.0, n)
    s = rng.standard_normal(n)
    lo = np.sum(np.where(s > 0, s * l, s * u))
    hi = np.sum(np.where(s > 0, s * u, s * l))
    return DiagQpInstance(d2, m, l, u, s, rng.uniform(lo, hi))


def cmd_qp_check(args):
    if args.n > 8:
        raise InvalidInputError("qp-check compares with exhaustive enumeration; use --n <= 8")
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for t in range(args.trials):
        inst = _random_qp(rng, args.n)
        worst = max(worst, float(np.abs(solve_diag_qp(inst, seed=t) - dense_qp_oracle(inst)).max()))
    print(json.dumps({"n": args.n, "trials": args.trials, "backend": BACKEND,
                      "max_deviation": worst}))
    return EXIT_OK if worst <= 1e-9 else EXIT_NOT_CONVERGED


COMMANDS = {
    "gen": cmd_gen, "meb": cmd_meb, "mecp": cmd_mecp, "polydist": cmd_polydist,
    "margin": cmd_margin, "bench": cmd_bench, "qp-check": cmd_qp_check,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EgmGeomError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())

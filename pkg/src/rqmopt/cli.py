"""``rqmopt`` command line: gen, solve, bench, verify.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from rqmopt import checks
from rqmopt.datagen import generate, write_csv
from rqmopt.diagnostics import reference_solution
from rqmopt.errors import ConfigurationError, RqmError
from rqmopt.experiment import METHODS, ExperimentConfig, cmd_bench, run_trials
from rqmopt.schedules import ScheduleKind
from rqmopt.trace import TraceOptions, write_trace_csv

log = logging.getLogger("rqmopt")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _problem_flags(p):
    g = p.add_argument_group("problem constants")
    g.add_argument("--data", help="dataset CSV written by `gen`")
    g.add_argument("--delta", type=float, default=2.0, help="Huber threshold (default 2)")
    g.add_argument("--lambda", dest="lam", type=float, default=0.1, help="l1 weight (default 0.1)")
    g.add_argument("--sigma", type=float, default=0.0, help="elastic-net weight (default 0)")
    g.add_argument("--batch", type=int, default=1, help="samples per stochastic subgradient (default 1)")
    g.add_argument("--scale", choices=("sum", "mean"), default="sum",
                   help="loss is the sum (default) or the mean of per-sample Huber terms")


def _run_flags(p, iters_default=5000, trials_default=100):
    g = p.add_argument_group("run")
    g.add_argument("--iters", type=int, default=iters_default)
    g.add_argument("--trials", type=int, default=trials_default)
    g.add_argument("--workers", type=int, default=1, help="processes for trial fan-out")
    g.add_argument("--gamma-const", type=float, default=10.0, help="gamma for the quadratic schedule (default 10)")


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress):
        # the subcommand copies must not overwrite values given before the subcommand
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--seed", type=int, default=d(0))
        p.add_argument("--out-dir", default=d("."), help="directory for outputs (default .)")
        p.add_argument("--stride", type=int, default=d(10), help="record every n-th iteration (default 10)")
        p.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return p

    common = global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="rqmopt", description=__doc__.splitlines()[0],
                                     parents=[global_flags(suppress=False)])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="generate a synthetic Huber regression dataset")
    gen.add_argument("--n", type=int, default=10_000, help="samples (default 10000)")
    gen.add_argument("--dim", type=int, default=10, help="features (default 10)")
    gen.add_argument("--nnz", type=int, default=4, help="nonzero true coefficients (default 4)")
    gen.add_argument("--outlier-prob", type=float, default=0.05)
    gen.add_argument("--out", default="data.csv")

    solve = sub.add_parser("solve", parents=[common], help="run one method for several trials, write a trace CSV")
    solve.add_argument("--method", choices=METHODS, default="rqm")
    solve.add_argument("--schedule", choices=[k.value for k in ScheduleKind], default="cor1")
    solve.add_argument("--custom-gamma-file", help="JSON {gamma, a} or whitespace list of gamma values")
    solve.add_argument("--with-reference", action="store_true",
                       help="compute a certified reference optimum and fill the gap/bound columns")
    solve.add_argument("--out", default="trace.csv")
    _problem_flags(solve)
    _run_flags(solve)

    bench = sub.add_parser("bench", parents=[common], help="RQM-A vs RQM-B vs SRSG on one dataset")
    bench.add_argument("--gnuplot", action="store_true", help="also write bench_plot.gp")
    _problem_flags(bench)
    _run_flags(bench)

    verify = sub.add_parser("verify", parents=[common], help="run the invariant suite, write a JSON report")
    verify.add_argument("--check", choices=(*checks.CHECK_NAMES, "all"), action="append",
                        help="check to run (repeatable, default all)")
    verify.add_argument("--det-iters", type=int, default=1000, help="iterations for lyapunov/bound (default 1000)")
    verify.add_argument("--cor2-sigma", type=float, default=checks.COR2_DEFAULT_SIGMA,
                        help="elastic-net weight for the cor2 rate study (default 0.1)")
    verify.add_argument("--out", default="verify_report.json")
    _problem_flags(verify)
    _run_flags(verify)
    return parser


def _config(args, **extra) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    values = {k: v for k, v in vars(args).items() if k in known and v is not None}
    values.update(extra)
    return ExperimentConfig(**values)


def _out_path(args) -> Path:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / args.out


def cmd_gen(args) -> int:
    data = generate(args.seed, n_samples=args.n, dim=args.dim, nnz=args.nnz, outlier_prob=args.outlier_prob)
    path = _out_path(args)
    write_csv(data, path)
    log.info("wrote %s (%d samples, %d outliers)", path, data.n_samples, int(data.outlier_mask.sum()))
    return EXIT_OK


def cmd_solve(args) -> int:
    config = _config(args)
    problem = config.load_problem()
    schedule = None if config.method == "srsg" else config.make_schedule()
    options = TraceOptions(stride=config.stride)
    if args.with_reference:
        options.x_ref, options.F_ref = reference_solution(problem)
    traces = run_trials(problem, config.method, schedule, config.iters, config.trials, config.seed, options,
                        config.workers)
    path = _out_path(args)
    write_trace_csv(traces, path)
    failed = [(t, tr.failure) for t, tr in enumerate(traces) if tr.failed]
    for t, msg in failed:
        log.error("trial %d failed: %s", t, msg)
    log.info("wrote %s", path)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_bench_cli(args) -> int:
    summary = cmd_bench(_config(args), gnuplot=args.gnuplot)
    log.info("wrote %s and %s", summary.long_csv, summary.summary_csv)
    return EXIT_OK if summary.ok else EXIT_NUMERICAL


def cmd_verify(args) -> int:
    names = args.check or ["all"]
    names = checks.CHECK_NAMES if "all" in names else tuple(dict.fromkeys(names))
    det_problem = rate_problem = None
    if args.data:
        problem = _config(args).load_problem()
        det_problem = rate_problem = problem
    results = checks.run_suite(
        names, seed=args.seed, det_problem=det_problem, rate_problem=rate_problem, det_iters=args.det_iters,
        iters=args.iters, trials=args.trials, workers=args.workers, cor2_sigma=args.cor2_sigma,
    )
    doc = checks.report(results, seed=args.seed, data=args.data, iters=args.iters, trials=args.trials,
                        det_iters=args.det_iters)
    path = _out_path(args)
    path.write_text(json.dumps(doc, indent=2) + "\n")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.check:<22} margin={r.margin:.6g}  tolerance={r.tolerance:g}")
    log.info("wrote %s", path)
    return EXIT_OK if doc["pass"] else EXIT_CHECK_FAILED


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench_cli, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.stride < 1:
            raise ConfigurationError(f"--stride must be >= 1, got {args.stride}")
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RqmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

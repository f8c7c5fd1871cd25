"""Multi-trial experiments and the RQM-A / RQM-B / SRSG benchmark.

Trial ``t`` of an experiment seeded with ``seed`` runs on the stream
``trial_stream(seed, t)`` (see ``rqmopt.streams``), so results do not depend
on how trials are spread across worker processes.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from rqmopt.datagen import read_csv
from rqmopt.errors import ConfigurationError
from rqmopt.oracle import HuberRegressionProblem
from rqmopt.rqm import run
from rqmopt.schedules import DEFAULT_GAMMA_CONST, Schedule, ScheduleKind
from rqmopt.srsg import srsg_run
from rqmopt.streams import trial_stream
from rqmopt.trace import TraceOptions

log = logging.getLogger(__name__)

METHODS = ("rqm", "srsg")

# the benchmark's three contenders: (label, method, schedule kind)
BENCH_VARIANTS = (
    ("rqm-A", "rqm", ScheduleKind.COR1),
    ("rqm-B", "rqm", ScheduleKind.QUADRATIC),
    ("srsg", "srsg", None),
)


@dataclass
class ExperimentConfig:
    method: str = "rqm"
    schedule: str = "cor1"
    iters: int = 5000
    trials: int = 100
    seed: int = 0
    data: str | None = None
    delta: float = 2.0
    lam: float = 0.1
    sigma: float = 0.0
    batch: int = 1
    scale: str = "sum"
    gamma_const: float = DEFAULT_GAMMA_CONST
    custom_gamma_file: str | None = None
    stride: int = 10
    out_dir: str = "."
    out: str | None = None
    workers: int = 1
    # data generation
    n_samples: int = 10_000
    dim: int = 10
    nnz: int = 4

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        ScheduleKind.parse(self.schedule)
        if self.iters < 1:
            raise ConfigurationError(f"iters must be >= 1, got {self.iters!r}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials!r}")
        if self.stride < 1:
            raise ConfigurationError(f"stride must be >= 1, got {self.stride!r}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers!r}")

    def make_schedule(self, kind=None) -> Schedule:
        kind = ScheduleKind.parse(kind or self.schedule)
        if kind is ScheduleKind.CUSTOM:
            if not self.custom_gamma_file:
                raise ConfigurationError("schedule=custom needs custom_gamma_file")
            return Schedule.from_file(self.custom_gamma_file, sigma=self.sigma)
        return Schedule(kind, sigma=self.sigma, gamma_const=self.gamma_const)

    def load_problem(self) -> HuberRegressionProblem:
        if not self.data:
            raise ConfigurationError("no dataset given (--data)")
        path = Path(self.data)
        if not path.exists():
            raise FileNotFoundError(f"dataset not found: {path}")
        data = read_csv(path)
        return HuberRegressionProblem.from_dataset(
            data, delta=self.delta, lam=self.lam, sigma=self.sigma, batch=self.batch, scale=self.scale
        )


def _one_trial(args):
    problem, method, schedule, iters, seed, trial, options = args
    rng = trial_stream(seed, trial)
    if method == "srsg":
        return srsg_run(problem, iters, rng, options)
    return run(problem, schedule, iters, rng, options)


def run_trials(problem, method, schedule, iters, trials, seed, options=None, workers=1):
    """Run ``trials`` independent trials; results come back in trial order."""
    options = options or TraceOptions()
    tasks = [(problem, method, schedule, iters, seed, t, options) for t in range(trials)]
    if workers <= 1 or trials == 1:
        return [_one_trial(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_trial, tasks))


@dataclass
class BenchSummary:
    """Per-method mean/std curves plus bookkeeping that stays out of the CSVs."""

    iters: dict = field(default_factory=dict)
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)
    wall_seconds: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    long_csv: Path | None = None
    summary_csv: Path | None = None

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())


def _mean_std(traces, trials):
    """Mean and unbiased std over exactly ``trials`` values; failed trials count as NaN."""
    full = max(len(tr) for tr in traces)
    M = np.full((trials, full), np.nan)
    for t, tr in enumerate(traces):
        M[t, : len(tr)] = tr.objective
    mean = M.mean(axis=0)
    std = M.std(axis=0, ddof=1) if trials > 1 else np.zeros(full)
    return mean, std


def cmd_bench(config: ExperimentConfig, gnuplot: bool = False) -> BenchSummary:
    """Run RQM-A, RQM-B and SRSG on the same data and write the two CSVs.

    ``bench_long.csv``: method, trial, iter, objective.
    ``bench_summary.csv``: method, iter, mean, std.
    """
    problem = config.load_problem()
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    options = TraceOptions(stride=config.stride)
    summary = BenchSummary()
    all_traces = {}
    for label, method, kind in BENCH_VARIANTS:
        schedule = None if kind is None else Schedule(kind, sigma=config.sigma, gamma_const=config.gamma_const)
        t0 = time.perf_counter()
        traces = run_trials(problem, method, schedule, config.iters, config.trials, config.seed, options, config.workers)
        summary.wall_seconds[label] = time.perf_counter() - t0
        summary.failures[label] = [(t, tr.failure) for t, tr in enumerate(traces) if tr.failed]
        for t, msg in summary.failures[label]:
            log.error("%s trial %d failed: %s", label, t, msg)
        longest = max(traces, key=len)
        summary.iters[label] = longest.iters
        summary.mean[label], summary.std[label] = _mean_std(traces, config.trials)
        all_traces[label] = traces
        log.info("%s: %d trials in %.1fs", label, config.trials, summary.wall_seconds[label])

    summary.long_csv = out_dir / "bench_long.csv"
    with summary.long_csv.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "trial", "iter", "objective"])
        for label, traces in all_traces.items():
            for t, tr in enumerate(traces):
                for k, f in zip(tr.iters.tolist(), tr.objective.tolist()):
                    writer.writerow([label, t, k, repr(f)])

    summary.summary_csv = out_dir / "bench_summary.csv"
    with summary.summary_csv.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "iter", "mean", "std"])
        for label in all_traces:
            for k, m, s in zip(summary.iters[label].tolist(), summary.mean[label].tolist(), summary.std[label].tolist()):
                writer.writerow([label, k, repr(m), repr(s)])

    meta = {
        "config": asdict(config),
        "wall_seconds": summary.wall_seconds,
        "failures": {k: [[t, m] for t, m in v] for k, v in summary.failures.items()},
    }
    (out_dir / "bench_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    if gnuplot:
        write_gnuplot(out_dir / "bench_plot.gp", summary.summary_csv, [v[0] for v in BENCH_VARIANTS])
    return summary


def write_gnuplot(path, summary_csv, labels) -> None:
    """Emit a gnuplot script drawing mean +- one std per method from the summary CSV."""
    lines = [
        "set datafile separator ','",
        "set key top right",
        "set logscale y",
        "set xlabel 'iteration'",
        "set ylabel 'objective'",
        f"data = '{Path(summary_csv).name}'",
    ]
    plots = []
    for i, label in enumerate(labels, start=1):
        sel = f"(strcol(1) eq '{label}' ? $%s : NaN)"
        plots.append(
            f"data using 2:{sel % 3}:({sel % 3}-{sel % 4}):({sel % 3}+{sel % 4}) "
            f"with yerrorbars lc {i} pt 0 notitle"
        )
        plots.append(f"data using 2:{sel % 3} with lines lc {i} title '{label}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    Path(path).write_text("\n".join(lines) + "\n")

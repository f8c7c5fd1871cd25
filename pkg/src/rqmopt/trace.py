"""Per-trial run records and their CSV form."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rqmopt.prox import EUCLIDEAN

TRACE_COLUMNS = ("trial", "iter", "objective", "gap", "bound", "B_hat", "gamma_over_A", "wall_ns")


@dataclass
class TraceOptions:
    """What ``run`` records.

    Iterates are stored every ``stride`` iterations (and at the last one);
    objectives are evaluated afterwards, outside the oracle budget. When
    ``x_ref``/``F_ref`` are given the trace also carries the gap
    ``F(x_k) - F_ref`` and the bound ``(gamma_k Psi(x_ref) + B_k) / A_k``.
    """

    stride: int = 10
    x_ref: np.ndarray | None = None
    F_ref: float | None = None

    def __post_init__(self):
        if int(self.stride) < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride!r}")
        self.stride = int(self.stride)


@dataclass
class Trace:
    method: str
    iters: np.ndarray
    objective: np.ndarray
    gap: np.ndarray
    bound: np.ndarray
    B_hat: np.ndarray
    gamma_over_A: np.ndarray
    wall_ns: np.ndarray
    iterates: np.ndarray
    # ||w_k||^2 for every k, not just recorded ones
    w_sq: np.ndarray
    failure: str | None = None

    def __len__(self):
        return len(self.iters)

    @property
    def failed(self) -> bool:
        return self.failure is not None

    def rows(self, trial: int = 0):
        for i in range(len(self.iters)):
            yield (
                trial,
                int(self.iters[i]),
                float(self.objective[i]),
                float(self.gap[i]),
                float(self.bound[i]),
                float(self.B_hat[i]),
                float(self.gamma_over_A[i]),
                int(self.wall_ns[i]),
            )


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def write_trace_csv(traces, path) -> None:
    """One row per (trial, recorded iteration); trial numbers follow list order."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for trial, tr in enumerate(traces):
            for row in tr.rows(trial):
                writer.writerow([_fmt(v) for v in row])


@dataclass
class Recorder:
    """Accumulates strided snapshots during a run and assembles the ``Trace``."""

    method: str
    iters_total: int
    options: TraceOptions
    ks: list = field(default_factory=list)
    xs: list = field(default_factory=list)
    B: list = field(default_factory=list)
    gA: list = field(default_factory=list)
    gammas: list = field(default_factory=list)
    As: list = field(default_factory=list)
    wall: list = field(default_factory=list)
    w_sq: np.ndarray = None
    _t0: int = 0

    def __post_init__(self):
        self.w_sq = np.full(self.iters_total + 1, np.nan)
        self._t0 = time.perf_counter_ns()

    def wants(self, k) -> bool:
        return k % self.options.stride == 0 or k == self.iters_total

    def add(self, k, x, B_hat=np.nan, gamma=np.nan, A=np.nan):
        self.ks.append(k)
        self.xs.append(np.array(x, dtype=float))
        self.B.append(B_hat)
        self.gammas.append(gamma)
        self.As.append(A)
        self.wall.append(time.perf_counter_ns() - self._t0)

    def finish(self, problem, failure=None) -> Trace:
        n = len(self.ks)
        iterates = np.array(self.xs) if n else np.empty((0, problem.dim))
        objective = problem.objective_many(iterates) if n else np.empty(0)
        gammas = np.array(self.gammas, dtype=float)
        As = np.array(self.As, dtype=float)
        B = np.array(self.B, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma_over_A = gammas / As
        opts = self.options
        gap = np.full(n, np.nan)
        bound = np.full(n, np.nan)
        if opts.F_ref is not None:
            gap = objective - opts.F_ref
        if opts.x_ref is not None:
            psi_ref = EUCLIDEAN(opts.x_ref)
            with np.errstate(divide="ignore", invalid="ignore"):
                bound = (gammas * psi_ref + B) / As
        last = self.ks[-1] if n else -1
        w_sq = self.w_sq if failure is None else self.w_sq[: max(last, 0) + 1]
        return Trace(
            method=self.method,
            iters=np.array(self.ks, dtype=np.int64),
            objective=objective,
            gap=gap,
            bound=bound,
            B_hat=B,
            gamma_over_A=gamma_over_A,
            wall_ns=np.array(self.wall, dtype=np.int64),
            iterates=iterates,
            w_sq=w_sq,
            failure=failure,
        )

"""Verification suite behind ``rqmopt verify``.

Every check returns a ``CheckResult`` whose ``margin`` is positive when the
check passes (how far inside the tolerance the worst case landed) and
negative when it fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from rqmopt import prox as _prox
from rqmopt.datagen import generate
from rqmopt.diagnostics import (
    corollary_bound,
    lyapunov,
    mean_curve,
    psi,
    rate_slope,
    reference_solution,
    second_moment_estimate,
)
from rqmopt.errors import RateNotMeasurableError
from rqmopt.oracle import ExactOracle, HuberRegressionProblem
from rqmopt.rqm import init, run, step
from rqmopt.schedules import Schedule, ScheduleKind
from rqmopt.streams import check_stream
from rqmopt.trace import TraceOptions

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

PROX_TOL = 1e-6
PHI_GRAD_TOL = 1e-5
LYAPUNOV_RTOL = 1e-8
BOUND_TOL = 1e-8
SLOPE_MAX = {ScheduleKind.COR1: -0.35, ScheduleKind.COR2: -0.7}


@dataclass
class CheckResult:
    check: str
    passed: bool
    margin: float
    tolerance: float
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        margin = float(self.margin) if math.isfinite(self.margin) else str(self.margin)
        return {"check": self.check, "pass": bool(self.passed), "margin": margin,
                "tolerance": self.tolerance, **self.detail}


# -- brute-force 1-D minimization -------------------------------------------


def argmin_1d(delta_fun, center, radius, grid=2001, step_tol=1e-4, golden_iters=80):
    """Minimize many convex 1-D functions at once.

    ``delta_fun(c, t)`` must return ``h(c + t) - h(c)`` elementwise; working
    with differences keeps large constant offsets out of the comparisons.
    Each function is scanned on a uniform grid over ``center +- radius``,
    re-centred on the best grid point and rescanned with a finer grid until
    the spacing is at most ``step_tol``; the final bracket is refined by
    golden-section search.
    """
    c = np.array(center, dtype=float)
    r = np.array(radius, dtype=float)
    unit = np.linspace(-1.0, 1.0, grid)
    rows = np.arange(c.size)
    while True:
        t = r[:, None] * unit[None, :]
        j = np.argmin(delta_fun(c[:, None], t), axis=1)
        c = c + t[rows, j]
        r = 2.0 * r / (grid - 1)
        if np.all(r <= step_tol):
            break
    lo, hi = -r, r.copy()
    for _ in range(golden_iters):
        x1 = hi - GOLDEN * (hi - lo)
        x2 = lo + GOLDEN * (hi - lo)
        left = delta_fun(c, x1) <= delta_fun(c, x2)
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
    return c + 0.5 * (lo + hi)


def _abs_step(c, t):
    """``|c + t| - |c|`` without cancellation when the sign does not change."""
    same = (c + t) * c > 0
    return np.where(same, np.sign(c) * t, np.abs(c + t) - np.abs(c))


def brute_rqm_prox(s, A, lam, sigma, gamma):
    """Coordinatewise minimizer of ``s x + A lam |x| + (A sigma + gamma)/2 x^2`` by search."""
    s, A, lam, sigma, gamma = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, A, lam, sigma, gamma)))
    shape = s.shape
    s, A, lam, sigma, gamma = (v.ravel() for v in (s, A, lam, sigma, gamma))
    curv = A * sigma + gamma
    kink = A * lam

    def delta(c, t):
        i = (slice(None), None) if np.ndim(t) == 2 else slice(None)
        return t * (s[i] + curv[i] * c) + 0.5 * curv[i] * t * t + kink[i] * _abs_step(c, t)

    # h(x) > h(0) once curv/2 |x| > |s|
    radius = 2.0 * np.abs(s) / curv + 1.0
    return argmin_1d(delta, np.zeros_like(s), radius).reshape(shape)


def brute_srsg_prox(w, y, lam, gamma, sigma=0.0):
    """Coordinatewise minimizer of ``w x + lam |x| + sigma/2 x^2 + gamma/2 (x - y)^2`` by search."""
    w, y, lam, gamma, sigma = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (w, y, lam, gamma, sigma)))
    shape = w.shape
    w, y, lam, gamma, sigma = (v.ravel() for v in (w, y, lam, gamma, sigma))

    def delta(c, t):
        i = (slice(None), None) if np.ndim(t) == 2 else slice(None)
        lin = w[i] + sigma[i] * c + gamma[i] * (c - y[i])
        return t * lin + 0.5 * (sigma[i] + gamma[i]) * t * t + lam[i] * _abs_step(c, t)

    # moving t away from y costs at least gamma/2 t^2 - (|w| + lam + sigma |y|) |t|
    radius = 2.0 * (np.abs(w) + lam + sigma * np.abs(y)) / (gamma + sigma) + 1.0
    return argmin_1d(delta, y.copy(), radius).reshape(shape)


def _positive(rng, size, high=10.0):
    # uniform on (0, high]
    return high * (1.0 - rng.random(size))


# -- checks -----------------------------------------------------------------


def check_prox_equivalence(n_instances=1000, dim=4, seed=0, rqm_prox=None, srsg_prox=None) -> CheckResult:
    """Closed-form prox solutions against brute-force search on random instances."""
    rqm_prox = rqm_prox or _prox.rqm_prox
    srsg_prox = srsg_prox or _prox.srsg_prox
    rng = check_stream(seed)
    err_rqm = 0.0
    err_srsg = 0.0
    S = rng.uniform(-10, 10, (n_instances, dim))
    A, lam, sigma, gamma = (_positive(rng, n_instances) for _ in range(4))
    closed = np.array([rqm_prox(S[i], A[i], lam[i], sigma[i], gamma[i]) for i in range(n_instances)])
    brute = brute_rqm_prox(S, A[:, None], lam[:, None], sigma[:, None], gamma[:, None])
    err_rqm = float(np.max(np.abs(closed - brute)))

    W = rng.uniform(-10, 10, (n_instances, dim))
    Y = rng.uniform(-10, 10, (n_instances, dim))
    lam2, gamma2 = _positive(rng, n_instances), _positive(rng, n_instances)
    closed = np.array([srsg_prox(W[i], Y[i], lam2[i], gamma2[i]) for i in range(n_instances)])
    brute = brute_srsg_prox(W, Y, lam2[:, None], gamma2[:, None])
    err_srsg = float(np.max(np.abs(closed - brute)))

    worst = max(err_rqm, err_srsg)
    return CheckResult("prox", worst <= PROX_TOL, PROX_TOL - worst, PROX_TOL,
                       {"max_error_rqm": err_rqm, "max_error_srsg": err_srsg, "instances": n_instances})


def check_phi_gradient(n_instances=100, dim=4, seed=0, h=1e-4) -> CheckResult:
    """Central differences of phi against its maximizer."""
    rng = check_stream(seed + 1)
    worst = 0.0
    for _ in range(n_instances):
        s = rng.uniform(-10, 10, dim)
        A, lam, sigma, gamma = _positive(rng, 4)
        worst = max(worst, _prox.phi_gradient_check(s, A, lam, sigma, gamma, h))
    worst = float(worst)
    return CheckResult("phi_gradient", worst <= PHI_GRAD_TOL, PHI_GRAD_TOL - worst, PHI_GRAD_TOL,
                       {"max_error": worst, "instances": n_instances, "h": h})


def small_instance(seed=0, n_samples=50, features=2, lam=0.1, sigma=0.0, scale="sum") -> HuberRegressionProblem:
    """Tiny Huber/l1 problem (``features + 1`` parameters) for deterministic checks."""
    data = generate(seed, n_samples=n_samples, dim=features, nnz=min(2, features))
    return HuberRegressionProblem.from_dataset(data, lam=lam, sigma=sigma, scale=scale)


def lyapunov_path(problem, schedule, iters, x_refs):
    """``V_k`` for k = 0..iters along an exact-subgradient run, one row per reference point."""
    exact = ExactOracle(problem)
    F_refs = [problem.objective(xr) for xr in x_refs]
    V = np.empty((len(x_refs), iters + 1))
    state = init(exact, schedule)
    for k in range(iters + 1):
        w = problem.full_subgradient(state.x)
        for j, (xr, Fr) in enumerate(zip(x_refs, F_refs)):
            V[j, k] = lyapunov(state, problem, xr, Fr, w).V
        if k < iters:
            state = step(state, exact, None)
    return V


def check_lyapunov(problem=None, iters=1000, n_refs=10, seed=0, schedules=None) -> CheckResult:
    """Exact-subgradient runs: ``V_{k+1} <= V_k + rtol (1 + |V_k|)`` for random reference points."""
    if problem is None:
        problem = small_instance(seed)
    if schedules is None:
        schedules = [(Schedule(ScheduleKind.COR1), problem),
                     (Schedule(ScheduleKind.COR2, sigma=0.1), problem.with_constants(sigma=0.1))]
    rng = check_stream(seed + 2)
    x_refs = [rng.normal(0.0, 2.0, problem.dim) for _ in range(n_refs)]
    worst = math.inf
    v0_worst = math.inf
    per_schedule = {}
    for schedule, prob in schedules:
        V = lyapunov_path(prob, schedule, iters, x_refs)
        slack = LYAPUNOV_RTOL * (1.0 + np.abs(V[:, :-1])) - np.diff(V, axis=1)
        m = float(slack.min())
        # V_0 <= -gamma_0 Psi(x_0) <= 0
        x0 = init(prob, schedule).x
        v0 = float(np.min(-schedule.gamma(0) * psi(x0) + LYAPUNOV_RTOL - V[:, 0]))
        per_schedule[schedule.kind.value] = m
        worst = min(worst, m)
        v0_worst = min(v0_worst, v0)
    passed = worst >= 0 and v0_worst >= 0
    return CheckResult("lyapunov", passed, min(worst, v0_worst), LYAPUNOV_RTOL,
                       {"margin_by_schedule": per_schedule, "v0_margin": v0_worst, "iters": iters,
                        "reference_points": n_refs})


def check_theorem_bound(problem=None, iters=1000, seed=0, schedules=None, reference=None) -> CheckResult:
    """Exact-subgradient runs: ``gap_k <= (gamma_k Psi(x*) + B_k) / A_k + tol`` for every k."""
    if problem is None:
        problem = small_instance(seed)
    if schedules is None:
        schedules = [(Schedule(ScheduleKind.COR1), problem),
                     (Schedule(ScheduleKind.COR2, sigma=0.1), problem.with_constants(sigma=0.1))]
    worst = math.inf
    per_schedule = {}
    for schedule, prob in schedules:
        x_ref, F_ref = reference if reference is not None and prob is problem else reference_solution(prob)
        tr = run(ExactOracle(prob), schedule, iters, None, TraceOptions(stride=1, x_ref=x_ref, F_ref=F_ref))
        m = float(np.min(tr.bound + BOUND_TOL - tr.gap))
        per_schedule[schedule.kind.value] = m
        worst = min(worst, m)
    return CheckResult("bound", worst >= 0, worst, BOUND_TOL,
                       {"margin_by_schedule": per_schedule, "iters": iters})


@dataclass
class RateStudy:
    """Everything measured in one multi-trial rate experiment."""

    kind: ScheduleKind
    traces: list
    x_ref: np.ndarray
    F_ref: float
    G2: float
    iters: np.ndarray
    mean_gap: np.ndarray
    stderr: np.ndarray
    envelope: np.ndarray
    mean_bound: np.ndarray
    slope: float | None
    slope_stderr: float | None
    G2_analytic: float | None = None


def rate_study(problem, kind, iters=5000, trials=100, seed=0, stride=10, window=(500, 5000), workers=1,
               reference=None) -> RateStudy:
    from rqmopt.experiment import run_trials

    kind = ScheduleKind.parse(kind)
    schedule = Schedule(kind, sigma=problem.sigma if kind is ScheduleKind.COR2 else 0.0)
    x_ref, F_ref = reference if reference is not None else reference_solution(problem)
    options = TraceOptions(stride=stride, x_ref=x_ref, F_ref=F_ref)
    traces = run_trials(problem, "rqm", schedule, iters, trials, seed, options, workers)
    ks, mean_gap, se = mean_curve(traces, "gap")
    _, mean_bound, _ = mean_curve(traces, "bound")
    G2 = second_moment_estimate(traces)
    envelope = corollary_bound(kind, ks, psi(x_ref), G2, beta=schedule.beta, sigma=problem.sigma)
    try:
        slope, slope_se = rate_slope(traces, F_ref, window)
    except RateNotMeasurableError:
        slope, slope_se = None, None
    G2_analytic = problem.analytic_G() ** 2 if hasattr(problem, "analytic_G") else None
    return RateStudy(kind, traces, x_ref, F_ref, G2, ks, mean_gap, se, envelope, mean_bound, slope, slope_se,
                     G2_analytic)


def rate_checks(study: RateStudy) -> list[CheckResult]:
    """Envelope, stochastic gap bound and fitted slope for one study."""
    name = study.kind.value
    env_margin = float(np.min(study.envelope + 3 * study.stderr - study.mean_gap))
    thm_margin = float(np.min(study.mean_bound + 3 * study.stderr - study.mean_gap))
    limit = SLOPE_MAX[study.kind]
    if study.slope is None:
        slope_res = CheckResult(f"rate_slope_{name}", False, -math.inf, limit, {"slope": None})
    else:
        slope_res = CheckResult(f"rate_slope_{name}", study.slope <= limit, limit - study.slope, limit,
                                {"slope": study.slope, "slope_stderr": study.slope_stderr})
    return [
        CheckResult(f"envelope_{name}", env_margin >= 0, env_margin, 3.0,
                    {"G2_hat": study.G2, "G2_analytic": study.G2_analytic, "trials": len(study.traces)}),
        CheckResult(f"bound_stochastic_{name}", thm_margin >= 0, thm_margin, 3.0, {"trials": len(study.traces)}),
        slope_res,
    ]


CHECK_NAMES = ("prox", "phi", "lyapunov", "bound", "rate")
COR2_DEFAULT_SIGMA = 0.1


def run_suite(names=CHECK_NAMES, *, seed=0, det_problem=None, rate_problem=None, det_iters=1000,
              iters=5000, trials=100, workers=1, cor2_sigma=COR2_DEFAULT_SIGMA) -> list[CheckResult]:
    """Run the selected checks in a fixed order.

    ``det_problem`` feeds the exact-subgradient checks (default: a 50-sample,
    two-feature instance); ``rate_problem`` feeds the multi-trial studies
    (default: 2000 samples of the standard synthetic design). The cor2 study
    uses ``cor2_sigma`` as the elastic-net weight.
    """
    unknown = set(names) - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; choose from {CHECK_NAMES}")
    results = []
    if "prox" in names:
        results.append(check_prox_equivalence(seed=seed))
    if "phi" in names:
        results.append(check_phi_gradient(seed=seed))
    if det_problem is None and ({"lyapunov", "bound"} & set(names)):
        det_problem = small_instance(seed)
    if "lyapunov" in names:
        results.append(check_lyapunov(det_problem, iters=det_iters, seed=seed))
    if "bound" in names:
        results.append(check_theorem_bound(det_problem, iters=det_iters, seed=seed))
    if "rate" in names:
        if rate_problem is None:
            data = generate(seed, n_samples=2000)
            rate_problem = HuberRegressionProblem.from_dataset(data)
        window = (max(1, iters // 10), iters)
        studies = [
            (ScheduleKind.COR1, rate_problem.with_constants(sigma=0.0)),
            (ScheduleKind.COR2, rate_problem.with_constants(sigma=cor2_sigma)),
        ]
        for kind, prob in studies:
            study = rate_study(prob, kind, iters=iters, trials=trials, seed=seed, window=window, workers=workers)
            results.extend(rate_checks(study))
    return results


def report(results, **meta) -> dict:
    """JSON-ready report: overall verdict, run metadata and one entry per check."""
    return {"pass": all(r.passed for r in results), **meta, "checks": [r.as_dict() for r in results]}

"""Runtime checks of the RQM theory: Lyapunov function, bounds, empirical rates.

Notation: ``F = loss + g``, ``Psi(x) = 0.5 ||x||^2``, and for a reference point
``x_ref`` with ``F_ref = F(x_ref)``

    V_k = A_k (F(x_k) - F_ref) + phi_k(-s_k) + <s_k, x_ref> + A_k g(x_ref) - B_k

where ``phi_k(s) = max_x <s, x> - A_k g(x) - gamma_k Psi(x)``. With exact
subgradients ``V_k`` is nonincreasing for *any* reference point, and
``F(x_k) - F_ref <= (gamma_k Psi(x_ref) + B_k) / A_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from rqmopt.errors import RateNotMeasurableError, ReferenceNotConvergedError
from rqmopt.oracle import ExactOracle
from rqmopt.prox import EUCLIDEAN, phi_eval, rqm_prox
from rqmopt.rqm import RqmState, aggregate, init, step
from rqmopt.schedules import Schedule, ScheduleKind


@dataclass(frozen=True)
class LyapunovRecord:
    k: int
    V: float
    F_gap_term: float
    phi_term: float
    linear_term: float
    B_term: float


@dataclass(frozen=True)
class BoundRecord:
    k: int
    theorem_bound: float
    corollary_bound: float
    gap: float


def lyapunov(state: RqmState, problem, x_ref, F_ref: float, w=None) -> LyapunovRecord:
    """``V_k`` at the state's index.

    ``V_k`` involves ``s_k`` and ``B_k``, which include ``w_k``; pass the
    subgradient the solver will use at this step, or leave ``w=None`` to use
    the exact one.
    """
    x_ref = np.asarray(x_ref, dtype=float)
    if w is None:
        w = problem.full_subgradient(state.x)
    s_k, B_k = aggregate(state, np.asarray(w, dtype=float))
    A, gamma = state.A, state.gamma
    F_gap = A * (problem.objective(state.x) - F_ref) if A else 0.0
    phi, _ = phi_eval(-s_k, A, problem.lam, problem.sigma, gamma)
    linear = float(s_k @ x_ref) + A * problem.regularizer(x_ref)
    return LyapunovRecord(state.k, F_gap + phi + linear - B_k, F_gap, phi, linear, B_k)


def theorem_bound(gamma_k: float, A_k: float, psi_ref: float, B_k: float) -> float:
    """``(gamma_k Psi(x_ref) + B_k) / A_k``; ``inf`` when ``A_k == 0``."""
    if A_k == 0:
        return math.inf
    return (gamma_k * psi_ref + B_k) / A_k


def corollary_bound(kind, k, psi_ref: float, G2: float, beta: float = 1.0, sigma: float = 0.0):
    """Rate envelope for the cor1 and cor2 schedules (vectorized over ``k``).

    cor1: ``(Psi(x_ref) + G^2/beta) / sqrt(k+1)``;
    cor2: ``(Psi(x_ref) + G^2/sigma) * ln(2k+3) / (k+1)`` (needs ``sigma > 0``).
    """
    kind = ScheduleKind.parse(kind)
    k = np.asarray(k, dtype=float)
    if kind is ScheduleKind.COR1:
        return (psi_ref + G2 / beta) / np.sqrt(k + 1)
    if kind is ScheduleKind.COR2:
        if not sigma > 0:
            raise ValueError("the cor2 envelope needs sigma > 0")
        return (psi_ref + G2 / sigma) * np.log(2 * k + 3) / (k + 1)
    raise ValueError(f"no rate envelope for schedule {kind.value!r}")


# -- reference solutions ----------------------------------------------------


def _reference_schedule(problem) -> Schedule:
    if problem.sigma > 0:
        return Schedule(ScheduleKind.COR2, sigma=problem.sigma)
    return Schedule(ScheduleKind.COR1)


def _deterministic_rqm(problem, iters):
    exact = ExactOracle(problem)
    state = init(exact, _reference_schedule(problem))
    best_x, best_F = state.x, problem.objective(state.x)
    for _ in range(iters):
        state = step(state, exact, None)
        F = problem.objective(state.x)
        if F < best_F:
            best_x, best_F = state.x, F
    return best_x, best_F


def _polish(problem, x0, max_iter):
    """Accelerated proximal gradient with gradient-based restart; needs a smooth loss."""
    L = problem.smooth_lipschitz
    x = np.array(x0, dtype=float)
    y = x.copy()
    t = 1.0
    best_x, best_F = x, problem.objective(x)
    for _ in range(max_iter):
        grad = problem.full_subgradient(y)
        # prox of g/L at y - grad/L
        x_new = rqm_prox(grad - L * y, 1.0, problem.lam, problem.sigma, L)
        if np.dot(y - x_new, x_new - x) > 0:
            t = 1.0
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_new + ((t - 1.0) / t_new) * (x_new - x)
        done = np.linalg.norm(x_new - x) <= 1e-15 * (1.0 + np.linalg.norm(x))
        x, t = x_new, t_new
        F = problem.objective(x)
        if F < best_F:
            best_x, best_F = x, F
        if done:
            break
    return best_x, best_F


def _reference_once(problem, budget):
    x, F = _deterministic_rqm(problem, budget)
    if getattr(problem, "smooth_lipschitz", None):
        xp, Fp = _polish(problem, x, budget)
        if Fp < F:
            x, F = xp, Fp
    return x, F


def reference_solution(problem, budget: int = 10_000, rtol: float = 1e-6) -> tuple[np.ndarray, float]:
    """Best iterate of a deterministic (exact-subgradient) RQM run and its objective.

    Uses the cor2 schedule when the regularizer is strongly convex, cor1
    otherwise. When the loss is smooth the result is refined with
    accelerated proximal gradient. The run is repeated with twice the
    budget; if that improves the objective by more than
    ``rtol * max(1, |F|)`` the reference is rejected.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget!r}")
    x1, F1 = _reference_once(problem, budget)
    x2, F2 = _reference_once(problem, 2 * budget)
    if F1 - F2 > rtol * max(1.0, abs(F2)):
        raise ReferenceNotConvergedError(
            f"doubling the budget to {2 * budget} improved F from {F1!r} to {F2!r}"
        )
    return (x2, F2) if F2 <= F1 else (x1, F1)


# -- statistics over trials -------------------------------------------------


def _common_iters(traces):
    if not traces:
        raise ValueError("no traces")
    iters = traces[0].iters
    for tr in traces[1:]:
        if not np.array_equal(tr.iters, iters):
            raise ValueError("traces were recorded at different iterations")
    return iters


def mean_curve(traces, field: str = "objective") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(iters, mean, stderr)`` of a trace field across trials."""
    iters = _common_iters(traces)
    M = np.array([getattr(tr, field) for tr in traces])
    mean = M.mean(axis=0)
    if len(traces) > 1:
        se = M.std(axis=0, ddof=1) / math.sqrt(len(traces))
    else:
        se = np.zeros_like(mean)
    return iters, mean, se


def second_moment_estimate(traces) -> float:
    """``G^2`` estimate: max over k of the across-trial mean of ``||w_k||^2``."""
    W = np.array([tr.w_sq for tr in traces])
    return float(np.nanmax(np.nanmean(W, axis=0)))


def loglog_slope(iters, gaps) -> tuple[float, float]:
    """OLS slope (and its standard error) of ``log gap`` against ``log(k+1)``."""
    iters = np.asarray(iters, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if iters.size < 3:
        raise RateNotMeasurableError("need at least 3 points to fit a slope")
    if np.any(~(gaps > 0)):
        raise RateNotMeasurableError("gap is nonpositive inside the window")
    fit = stats.linregress(np.log(iters + 1), np.log(gaps))
    return float(fit.slope), float(fit.stderr)


def rate_slope(traces, F_star: float, window: tuple[int, int] = (500, 5000)) -> tuple[float, float]:
    """Fit the empirical convergence rate of the mean gap over ``window`` (inclusive)."""
    iters, mean, _ = mean_curve(traces)
    lo, hi = window
    sel = (iters >= lo) & (iters <= hi)
    return loglog_slope(iters[sel], mean[sel] - F_star)


def psi(x) -> float:
    return EUCLIDEAN(x)

"""Regularized quasi-monotone method.

One iteration at index k:

1. draw ``w_k``, a stochastic subgradient of the loss at ``x_k``;
2. aggregate ``s_k = s_{k-1} + a_k w_k``;
3. forecast ``x+_k = argmin <s_k, x> + A_{k+1} g(x) + gamma_{k+1} Psi(x)``;
4. average ``x_{k+1} = (A_k x_k + a_{k+1} x+_k) / A_{k+1}``.

Alongside, the solver accumulates the empirical second-moment term
``B_k = 0.5 * sum_{l<=k} a_l^2 / mu_l * ||w_l||^2`` that appears in the
last-iterate bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rqmopt.errors import ConfigurationError, NumericalFailure
from rqmopt.prox import rqm_prox
from rqmopt.schedules import Schedule
from rqmopt.trace import Recorder, Trace, TraceOptions


@dataclass(frozen=True)
class RqmState:
    """Solver state at index ``k``.

    ``x`` is ``x_k``. The aggregates lag one index behind because ``w_k`` is
    drawn at the start of the next step: ``s`` is ``s_{k-1}``, ``x_plus`` is
    ``x+_{k-1}``, ``B_hat`` is ``B_{k-1}`` and ``g2_sum`` sums ``||w_l||^2``
    over ``l < k``. ``A`` and ``gamma`` are ``A_k`` and ``gamma_k``.
    """

    k: int
    x: np.ndarray
    x_plus: np.ndarray
    s: np.ndarray
    A: float
    gamma: float
    B_hat: float
    g2_sum: float
    schedule: Schedule
    last_w_sq: float = math.nan


def init(problem, schedule: Schedule) -> RqmState:
    """``x_0 = argmin A_0 g(x) + gamma_0 Psi(x)``, ``s_{-1} = 0``."""
    if schedule.sigma > problem.sigma * (1 + 1e-12):
        raise ConfigurationError(
            f"schedule credits sigma={schedule.sigma!r} but the regularizer is only "
            f"{problem.sigma!r}-strongly convex"
        )
    _, A0, gamma0 = schedule.params(0)
    zero = np.zeros(problem.dim)
    x0 = rqm_prox(zero, A0, problem.lam, problem.sigma, gamma0)
    return RqmState(
        k=0, x=x0, x_plus=x0.copy(), s=zero, A=A0, gamma=gamma0, B_hat=0.0, g2_sum=0.0, schedule=schedule
    )


def aggregate(state: RqmState, w, w_sq: float | None = None) -> tuple[np.ndarray, float]:
    """Fold ``w_k`` into the aggregates: returns ``(s_k, B_k)``."""
    sched = state.schedule
    a_k = sched.params(state.k)[0]
    if w_sq is None:
        w_sq = float(np.dot(w, w))
    mu_k = state.A * sched.sigma + state.gamma * sched.beta
    return state.s + a_k * w, state.B_hat + 0.5 * a_k * a_k / mu_k * w_sq


def step(state: RqmState, problem, rng) -> RqmState:
    """Advance from index ``k`` to ``k + 1`` with exactly one oracle call."""
    sample = problem.sample_subgradient(state.x, rng)
    s_k, B_k = aggregate(state, sample.w, sample.squared_dual_norm)
    k1 = state.k + 1
    a1, A1, gamma1 = state.schedule.params(k1)
    x_plus = rqm_prox(s_k, A1, problem.lam, problem.sigma, gamma1)
    x_next = (state.A * state.x + a1 * x_plus) / A1
    # one reduction catches inf/nan anywhere in the new state
    if not math.isfinite(float(x_next.sum()) + float(x_plus.sum()) + B_k):
        raise NumericalFailure("non-finite value in RQM state", iteration=state.k)
    return RqmState(
        k=k1,
        x=x_next,
        x_plus=x_plus,
        s=s_k,
        A=A1,
        gamma=gamma1,
        B_hat=B_k,
        g2_sum=state.g2_sum + sample.squared_dual_norm,
        schedule=state.schedule,
        last_w_sq=sample.squared_dual_norm,
    )


def run(problem, schedule: Schedule, iters: int, rng, options: TraceOptions | None = None) -> Trace:
    """Run ``iters`` steps from ``init`` and record a trace of length ~``iters/stride + 1``.

    Row k holds ``F(x_k)``, ``B_k`` and ``gamma_k / A_k``. ``B_k`` needs
    ``w_k``, so after the last step one more oracle call is made at
    ``x_iters`` to close the final row; it does not move the iterate.
    On a ``NumericalFailure`` the partial trace is returned with
    ``failure`` set.
    """
    if iters < 1:
        raise ConfigurationError(f"iters must be >= 1, got {iters!r}")
    options = options or TraceOptions()
    rec = Recorder("rqm", iters, options)
    state = init(problem, schedule)
    failure = None
    try:
        for k in range(iters):
            new = step(state, problem, rng)
            rec.w_sq[k] = new.last_w_sq
            if rec.wants(k):
                rec.add(k, state.x, new.B_hat, state.gamma, state.A)
            state = new
        sample = problem.sample_subgradient(state.x, rng)
        _, B_last = aggregate(state, sample.w, sample.squared_dual_norm)
        rec.w_sq[iters] = sample.squared_dual_norm
        rec.add(iters, state.x, B_last, state.gamma, state.A)
    except NumericalFailure as exc:
        failure = str(exc)
    return rec.finish(problem, failure)

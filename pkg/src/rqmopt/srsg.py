"""Stochastic regularized subgradient method with Nesterov extrapolation (SRSG).

With ``theta_k = 2 / (k + 1)`` and ``gamma_k = (k + 1)^(3/2)``::

    y_k       = xh_k + theta_k (1/theta_{k-1} - 1) (xh_k - xh_{k-1})
    xh_{k+1}  = argmin <w(y_k), x> + g(x) + (gamma_k / 2) ||x - y_k||^2

Both ``xh_0`` and ``xh_{-1}`` start at zero, so the k = 0 extrapolation term
vanishes whatever ``theta_{-1}`` would be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rqmopt.errors import ConfigurationError, NumericalFailure
from rqmopt.prox import srsg_prox
from rqmopt.trace import Recorder, Trace, TraceOptions


def srsg_theta(k: int) -> float:
    return 2.0 / (k + 1)


def srsg_gamma(k: int) -> float:
    return float(k + 1) ** 1.5


def extrapolation_coefficient(k: int) -> float:
    """``theta_k (1/theta_{k-1} - 1)``; zero at k = 0 by the zero start."""
    if k <= 0:
        return 0.0
    return srsg_theta(k) * (1.0 / srsg_theta(k - 1) - 1.0)


@dataclass(frozen=True)
class SrsgState:
    """``x_hat`` is xh_k, ``x_hat_prev`` is xh_{k-1}, ``y`` the last extrapolated point y_{k-1}."""

    k: int
    x_hat: np.ndarray
    x_hat_prev: np.ndarray
    y: np.ndarray
    last_w_sq: float = math.nan


def srsg_init(problem) -> SrsgState:
    zero = np.zeros(problem.dim)
    return SrsgState(0, zero, zero.copy(), zero.copy())


def srsg_step(state: SrsgState, problem, rng) -> SrsgState:
    k = state.k
    y = state.x_hat + extrapolation_coefficient(k) * (state.x_hat - state.x_hat_prev)
    sample = problem.sample_subgradient(y, rng)
    x_new = srsg_prox(sample.w, y, problem.lam, srsg_gamma(k), problem.sigma)
    if not math.isfinite(float(x_new.sum()) + float(y.sum())):
        raise NumericalFailure("non-finite value in SRSG state", iteration=k)
    return SrsgState(k + 1, x_new, state.x_hat, y, sample.squared_dual_norm)


def srsg_run(problem, iters: int, rng, options: TraceOptions | None = None) -> Trace:
    """Trace of ``F(xh_k)`` (the prox sequence, not the extrapolated points)."""
    if iters < 1:
        raise ConfigurationError(f"iters must be >= 1, got {iters!r}")
    options = options or TraceOptions()
    rec = Recorder("srsg", iters, options)
    state = srsg_init(problem)
    failure = None
    try:
        for k in range(iters):
            if rec.wants(k):
                rec.add(k, state.x_hat)
            state = srsg_step(state, problem, rng)
            rec.w_sq[k] = state.last_w_sq
        rec.add(iters, state.x_hat)
    except NumericalFailure as exc:
        failure = str(exc)
    return rec.finish(problem, failure)

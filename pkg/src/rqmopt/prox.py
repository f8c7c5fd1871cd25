r"""Closed-form subproblem solvers.

The regularizer is the elastic-net family

.. math:: g(x) = \lambda \|x\|_1 + \frac{\sigma}{2} \|x\|_2^2

and the prox-function is :math:`\Psi(x) = \tfrac12 \|x\|_2^2` (``beta = 1``).
Everything here is elementwise soft thresholding; ``np.sign(0) == 0`` so the
output is exactly zero on the threshold boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from rqmopt.errors import DegenerateSubproblemError


@dataclass(frozen=True)
class ProxFunction:
    """Nonnegative, ``beta``-strongly convex prox-function."""

    value: Callable[[np.ndarray], float]
    beta: float
    center_value: float = 0.0

    def __call__(self, x) -> float:
        return self.value(x)


def _half_sq_norm(x) -> float:
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ x) if x.ndim else 0.5 * float(x * x)


EUCLIDEAN = ProxFunction(value=_half_sq_norm, beta=1.0, center_value=0.0)


@dataclass(frozen=True)
class L1Regularizer:
    """``g(x) = lam * ||x||_1 + (sigma / 2) * ||x||_2^2``."""

    lam: float
    sigma: float = 0.0

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return self.lam * float(np.abs(x).sum()) + 0.5 * self.sigma * float(np.sum(x * x))

    @property
    def strongly_convex(self) -> bool:
        return self.sigma > 0


def _curvature(A, sigma, gamma):
    c = gamma + A * sigma
    if not c > 0:
        raise DegenerateSubproblemError(
            f"prox subproblem has nonpositive curvature gamma + A*sigma = {c!r}"
        )
    return c


def rqm_prox(s, A: float, lam: float, sigma: float, gamma: float) -> np.ndarray:
    """Minimize ``<s, x> + A*g(x) + gamma*Psi(x)`` over x.

    Returns ``sign(-s) * max(|s| - A*lam, 0) / (gamma + A*sigma)``.
    """
    c = _curvature(A, sigma, gamma)
    s = np.asarray(s, dtype=float)
    return np.sign(-s) * np.maximum(np.abs(s) - A * lam, 0.0) / c


def srsg_prox(w, y, lam: float, gamma: float, sigma: float = 0.0) -> np.ndarray:
    """Minimize ``<w, x> + g(x) + (gamma/2) * ||x - y||^2`` over x.

    With ``sigma == 0`` this is ``sign(y - w/gamma) * max(|y - w/gamma| - lam/gamma, 0)``.
    """
    if not gamma > 0:
        raise DegenerateSubproblemError(f"SRSG prox weight must be > 0, got {gamma!r}")
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=float)
    if sigma == 0:
        v = y - w / gamma
        return np.sign(v) * np.maximum(np.abs(v) - lam / gamma, 0.0)
    v = gamma * y - w
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0) / _curvature(1.0, sigma, gamma)


def phi_eval(s, A: float, lam: float, sigma: float, gamma: float) -> tuple[float, np.ndarray]:
    """Evaluate ``phi(s) = max_x <s, x> - A*g(x) - gamma*Psi(x)`` and its maximizer.

    The maximizer is also the gradient of ``phi`` at ``s``.
    """
    c = _curvature(A, sigma, gamma)
    s = np.asarray(s, dtype=float)
    excess = np.maximum(np.abs(s) - A * lam, 0.0)
    value = float(np.sum(excess * excess)) / (2.0 * c)
    return value, np.sign(s) * excess / c


def phi_gradient_check(s, A: float, lam: float, sigma: float, gamma: float, h: float = 1e-4) -> float:
    """Largest coordinate error between a central difference of ``phi`` and its maximizer."""
    if not h > 0:
        raise ValueError(f"finite-difference step must be > 0, got {h!r}")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    _, grad = phi_eval(s, A, lam, sigma, gamma)
    err = 0.0
    for j in range(s.size):
        e = np.zeros_like(s)
        e[j] = h
        fd = (phi_eval(s + e, A, lam, sigma, gamma)[0] - phi_eval(s - e, A, lam, sigma, gamma)[0]) / (2 * h)
        err = max(err, abs(fd - grad[j]))
    return err

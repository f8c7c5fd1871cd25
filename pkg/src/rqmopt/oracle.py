"""Huber-loss, l1-regularized linear regression and its stochastic oracle.

Parameters are laid out as ``theta = (a_1, ..., a_d, b)``: coefficients first,
intercept last. The loss is the sum over samples

    f(theta) = sum_i L_delta(a . x_i + b - y_i)

(``scale="mean"`` divides by N), the regularizer is
``g(theta) = lam * ||theta||_1 + (sigma/2) * ||theta||_2^2`` with the
intercept regularized too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Protocol

import numpy as np

from rqmopt.errors import ConfigurationError, ShapeError
from rqmopt.prox import L1Regularizer


def huber_value(z, delta: float):
    """``0.5 z^2`` for ``|z| <= delta``, else ``delta * (|z| - delta/2)``."""
    z = np.asarray(z, dtype=float)
    az = np.abs(z)
    out = np.where(az <= delta, 0.5 * z * z, delta * (az - 0.5 * delta))
    return float(out) if out.ndim == 0 else out


def huber_subgradient(z, delta: float):
    """``z`` inside the boundary, ``delta * sign(z)`` outside; equal to clipping."""
    out = np.clip(np.asarray(z, dtype=float), -delta, delta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SubgradientSample:
    w: np.ndarray
    squared_dual_norm: float

    @classmethod
    def of(cls, w) -> "SubgradientSample":
        w = np.asarray(w, dtype=float)
        return cls(w, float(w @ w))


class CompositeProblem(Protocol):
    """What the solvers and diagnostics need from a problem.

    ``g`` must be ``lam * ||x||_1 + (sigma/2) * ||x||^2`` so that the
    closed-form prox applies. ``smooth_lipschitz`` is the Lipschitz constant
    of the gradient of the loss, or ``None`` when the loss is nonsmooth.
    """

    dim: int
    lam: float
    sigma: float
    smooth_lipschitz: float | None

    def loss(self, theta) -> float: ...

    def regularizer(self, theta) -> float: ...

    def objective(self, theta) -> float: ...

    def objective_many(self, thetas) -> np.ndarray: ...

    def full_subgradient(self, theta) -> np.ndarray: ...

    def sample_subgradient(self, theta, rng) -> SubgradientSample: ...


_SCALES = ("sum", "mean")


@dataclass(frozen=True, eq=False)
class HuberRegressionProblem:
    inputs: np.ndarray
    targets: np.ndarray
    delta: float = 2.0
    lam: float = 0.1
    sigma: float = 0.0
    batch: int = 1
    scale: str = "sum"
    _design: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.array(self.inputs, dtype=float)
        y = np.array(self.targets, dtype=float)
        if X.ndim != 2:
            raise ShapeError(f"inputs must be a 2-D array, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ShapeError(f"targets shape {y.shape} does not match {X.shape[0]} inputs")
        if X.shape[0] == 0:
            raise ConfigurationError("dataset is empty")
        if not self.delta > 0:
            raise ConfigurationError(f"delta must be > 0, got {self.delta!r}")
        if not self.lam >= 0:
            raise ConfigurationError(f"lambda must be >= 0, got {self.lam!r}")
        if not self.sigma >= 0:
            raise ConfigurationError(f"sigma must be >= 0, got {self.sigma!r}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise ConfigurationError(f"batch must be a positive integer, got {self.batch!r}")
        if self.scale not in _SCALES:
            raise ConfigurationError(f"scale must be one of {_SCALES}, got {self.scale!r}")
        X.setflags(write=False)
        y.setflags(write=False)
        Z = np.hstack([X, np.ones((X.shape[0], 1))])
        Z.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "batch", int(self.batch))
        object.__setattr__(self, "_design", Z)

    @classmethod
    def from_dataset(cls, data, **kwargs) -> "HuberRegressionProblem":
        return cls(data.inputs, data.targets, **kwargs)

    @property
    def n_samples(self) -> int:
        return self.inputs.shape[0]

    @property
    def dim(self) -> int:
        return self.inputs.shape[1] + 1

    @property
    def weight(self) -> float:
        """Multiplier turning the per-sample mean loss into the objective's loss."""
        return float(self.n_samples) if self.scale == "sum" else 1.0

    @property
    def regularizer_fn(self) -> L1Regularizer:
        return L1Regularizer(self.lam, self.sigma)

    @cached_property
    def smooth_lipschitz(self) -> float:
        # L_delta'' <= 1, so the loss gradient is Lipschitz with lambda_max(Z^T Z) (times 1/N for mean)
        Z = self._design
        lmax = float(np.linalg.eigvalsh(Z.T @ Z)[-1])
        return lmax / self.n_samples * self.weight

    def _check(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise ShapeError(f"parameter vector has shape {theta.shape}, expected ({self.dim},)")
        return theta

    def residuals(self, theta) -> np.ndarray:
        return self._design @ self._check(theta) - self.targets

    def loss(self, theta) -> float:
        r = self.residuals(theta)
        return self.weight * float(np.mean(huber_value(r, self.delta)))

    def regularizer(self, theta) -> float:
        return self.regularizer_fn(self._check(theta))

    def objective(self, theta) -> float:
        return self.loss(theta) + self.regularizer(theta)

    def objective_many(self, thetas) -> np.ndarray:
        """Objective at each row of ``thetas``."""
        T = np.asarray(thetas, dtype=float)
        if T.ndim != 2 or T.shape[1] != self.dim:
            raise ShapeError(f"expected an (m, {self.dim}) array, got shape {T.shape}")
        out = np.empty(T.shape[0])
        # chunk so the residual matrix stays a few MB
        chunk = max(1, 2_000_000 // self.n_samples)
        for lo in range(0, T.shape[0], chunk):
            R = self._design @ T[lo:lo + chunk].T - self.targets[:, None]
            out[lo:lo + chunk] = self.weight * np.mean(huber_value(R, self.delta), axis=0)
        out += self.lam * np.abs(T).sum(axis=1) + 0.5 * self.sigma * np.einsum("ij,ij->i", T, T)
        return out

    def full_subgradient(self, theta) -> np.ndarray:
        """Exact subgradient of the loss (not of g)."""
        r = self.residuals(theta)
        return (self.weight / self.n_samples) * (huber_subgradient(r, self.delta) @ self._design)

    def sample_subgradient(self, theta, rng) -> SubgradientSample:
        """Unbiased minibatch estimate of ``full_subgradient``.

        Draws ``batch`` indices uniformly with replacement.
        """
        theta = self._check(theta)
        idx = rng.integers(self.n_samples, size=self.batch)
        Zb = self._design[idx]
        r = Zb @ theta - self.targets[idx]
        w = (self.weight / self.batch) * (np.clip(r, -self.delta, self.delta) @ Zb)
        return SubgradientSample(w, float(w @ w))

    def analytic_G(self) -> float:
        """A priori bound on ``||w||_2``: ``weight * delta * max_i ||(x_i, 1)||_2``."""
        return self.weight * self.delta * float(np.sqrt(np.max(np.sum(self._design ** 2, axis=1))))

    def with_constants(self, **changes) -> "HuberRegressionProblem":
        kwargs = dict(delta=self.delta, lam=self.lam, sigma=self.sigma, batch=self.batch, scale=self.scale)
        kwargs.update(changes)
        return HuberRegressionProblem(self.inputs, self.targets, **kwargs)


class ExactOracle:
    """Deterministic view of a problem: every oracle call returns the exact subgradient.

    The random stream passed to ``sample_subgradient`` is ignored.
    """

    def __init__(self, problem):
        self.problem = problem

    def __getattr__(self, name):
        # only reached for names not found normally; "problem" missing means mid-unpickle
        if name == "problem":
            raise AttributeError(name)
        return getattr(self.problem, name)

    def sample_subgradient(self, theta, rng=None) -> SubgradientSample:
        return SubgradientSample.of(self.problem.full_subgradient(theta))


def full_objective(theta, problem) -> float:
    """Exact ``F(theta) = loss + regularizer``."""
    return problem.objective(theta)


def sample_subgradient(theta, problem, rng) -> SubgradientSample:
    return problem.sample_subgradient(theta, rng)

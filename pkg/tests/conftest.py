import sys
from dataclasses import dataclass

import numpy as np
import pytest

from rqmopt.datagen import generate
from rqmopt.oracle import HuberRegressionProblem, SubgradientSample


@dataclass(frozen=True)
class AbsProblem:
    """``f(x) = |x - center|`` in one dimension plus ``lam |x| + sigma/2 x^2``.

    ``noise`` adds a symmetric +-noise term to each sampled subgradient so the
    oracle stays unbiased.
    """

    center: float = 1.0
    lam: float = 0.0
    sigma: float = 0.0
    noise: float = 0.0
    dim: int = 1
    smooth_lipschitz = None

    def loss(self, theta):
        return float(abs(theta[0] - self.center))

    def regularizer(self, theta):
        return float(self.lam * np.abs(theta).sum() + 0.5 * self.sigma * theta @ theta)

    def objective(self, theta):
        return self.loss(theta) + self.regularizer(theta)

    def objective_many(self, thetas):
        return np.array([self.objective(t) for t in np.atleast_2d(thetas)])

    def full_subgradient(self, theta):
        return np.sign(np.asarray(theta, dtype=float) - self.center)

    def sample_subgradient(self, theta, rng):
        w = self.full_subgradient(theta)
        if self.noise and rng is not None:
            w = w + self.noise * rng.choice([-1.0, 1.0])
        return SubgradientSample.of(w)


@pytest.fixture
def abs_problem():
    return AbsProblem()


@pytest.fixture(scope="session")
def small_data():
    return generate(7, n_samples=200, dim=5, nnz=3)


@pytest.fixture(scope="session")
def small_problem(small_data):
    return HuberRegressionProblem.from_dataset(small_data)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])

import pickle

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rqmopt.errors import ConfigurationError, ShapeError
from rqmopt.oracle import (
    ExactOracle,
    HuberRegressionProblem,
    SubgradientSample,
    full_objective,
    huber_subgradient,
    huber_value,
    sample_subgradient,
)


class FixedIndex:
    """Stand-in generator whose ``integers`` always returns the same indices."""

    def __init__(self, idx):
        self.idx = np.atleast_1d(idx)

    def integers(self, high, size=None):
        return self.idx


def test_huber_examples():
    assert huber_value(1.0, 2.0) == pytest.approx(0.5)
    assert huber_value(-5.0, 2.0) == pytest.approx(8.0)
    assert huber_subgradient(5.0, 2.0) == 2.0
    assert huber_subgradient(-0.5, 2.0) == -0.5
    np.testing.assert_allclose(huber_value(np.array([0.0, 2.0]), 2.0), [0.0, 2.0])


@given(st.floats(-50, 50), st.floats(0.1, 10))
def test_huber_subgradient_is_derivative(z, delta):
    h = 1e-6
    fd = (huber_value(z + h, delta) - huber_value(z - h, delta)) / (2 * h)
    assert huber_subgradient(z, delta) == pytest.approx(fd, abs=1e-5)


def test_full_objective_examples():
    p = HuberRegressionProblem(np.array([[1.0]]), np.array([1.0]), delta=2.0, lam=0.1)
    assert full_objective(np.array([1.0, 0.0]), p) == pytest.approx(0.1)
    p0 = p.with_constants(lam=0.0)
    assert full_objective(np.array([0.0, -2.0]), p0) == pytest.approx(4.0)


def test_sum_and_mean_scales(small_data):
    s = HuberRegressionProblem.from_dataset(small_data)
    m = HuberRegressionProblem.from_dataset(small_data, scale="mean")
    theta = np.linspace(-1, 1, s.dim)
    assert s.loss(theta) == pytest.approx(small_data.n_samples * m.loss(theta))
    np.testing.assert_allclose(s.full_subgradient(theta), small_data.n_samples * m.full_subgradient(theta))


def test_objective_many_matches_objective(small_problem, rng):
    T = rng.normal(size=(7, small_problem.dim))
    np.testing.assert_allclose(small_problem.objective_many(T), [small_problem.objective(t) for t in T])
    sp = small_problem.with_constants(sigma=0.3)
    np.testing.assert_allclose(sp.objective_many(T), [sp.objective(t) for t in T])


def test_full_subgradient_finite_difference(small_problem, rng):
    theta = rng.normal(size=small_problem.dim)
    g = small_problem.full_subgradient(theta)
    h = 1e-6
    for j in range(small_problem.dim):
        e = np.zeros(small_problem.dim)
        e[j] = h
        fd = (small_problem.loss(theta + e) - small_problem.loss(theta - e)) / (2 * h)
        assert g[j] == pytest.approx(fd, rel=1e-5, abs=1e-4)


def test_single_sample_estimates_average_to_full(small_problem, rng):
    theta = rng.normal(size=small_problem.dim)
    per_sample = [small_problem.sample_subgradient(theta, FixedIndex(i)).w for i in range(small_problem.n_samples)]
    np.testing.assert_allclose(np.mean(per_sample, axis=0), small_problem.full_subgradient(theta), rtol=1e-12)


def test_minibatch_sample(small_problem, rng):
    p = small_problem.with_constants(batch=3)
    theta = rng.normal(size=p.dim)
    idx = [4, 4, 17]
    w = p.sample_subgradient(theta, FixedIndex(idx)).w
    singles = [small_problem.sample_subgradient(theta, FixedIndex(i)).w for i in idx]
    np.testing.assert_allclose(w, np.mean(singles, axis=0))


def test_sample_reports_squared_norm(small_problem, rng):
    s = sample_subgradient(np.zeros(small_problem.dim), small_problem, rng)
    assert s.squared_dual_norm == pytest.approx(float(s.w @ s.w))
    assert SubgradientSample.of([3.0, 4.0]).squared_dual_norm == 25.0


def test_sample_norm_within_analytic_bound(small_problem, rng):
    theta = rng.normal(size=small_problem.dim) * 10
    bound = small_problem.analytic_G()
    for _ in range(50):
        assert np.sqrt(small_problem.sample_subgradient(theta, rng).squared_dual_norm) <= bound * (1 + 1e-12)


def test_smooth_lipschitz_bounds_gradient_change(small_problem, rng):
    L = small_problem.smooth_lipschitz
    for _ in range(20):
        a, b = rng.normal(size=(2, small_problem.dim)) * 3
        diff = np.linalg.norm(small_problem.full_subgradient(a) - small_problem.full_subgradient(b))
        assert diff <= L * np.linalg.norm(a - b) * (1 + 1e-10)


def test_exact_oracle_delegates_and_pickles(small_problem):
    ex = ExactOracle(small_problem)
    theta = np.ones(small_problem.dim)
    assert ex.dim == small_problem.dim
    np.testing.assert_array_equal(ex.sample_subgradient(theta, None).w, small_problem.full_subgradient(theta))
    again = pickle.loads(pickle.dumps(ex))
    assert again.objective(theta) == small_problem.objective(theta)


def test_problem_does_not_alias_caller_arrays():
    X = np.zeros((3, 2))
    y = np.zeros(3)
    p = HuberRegressionProblem(X, y)
    X[0, 0] = 9.0
    assert X.flags.writeable
    assert p.inputs[0, 0] == 0.0
    with pytest.raises(ValueError):
        p.inputs[0, 0] = 1.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(delta=0.0), dict(lam=-1.0), dict(sigma=-0.1), dict(batch=0), dict(batch=1.5), dict(scale="median")],
)
def test_invalid_constants(kwargs):
    with pytest.raises(ConfigurationError):
        HuberRegressionProblem(np.zeros((2, 1)), np.zeros(2), **kwargs)


def test_shape_errors(small_problem):
    with pytest.raises(ShapeError):
        HuberRegressionProblem(np.zeros(3), np.zeros(3))
    with pytest.raises(ShapeError):
        HuberRegressionProblem(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(ShapeError):
        small_problem.objective(np.zeros(small_problem.dim + 1))
    with pytest.raises(ShapeError):
        small_problem.objective_many(np.zeros(small_problem.dim))

import numpy as np
import pytest

from rqmopt.errors import ConfigurationError
from rqmopt.oracle import ExactOracle
from rqmopt.srsg import extrapolation_coefficient, srsg_gamma, srsg_init, srsg_run, srsg_step, srsg_theta
from rqmopt.streams import trial_stream
from rqmopt.trace import TraceOptions

from conftest import AbsProblem


def test_parameters():
    assert srsg_theta(0) == 2.0
    assert srsg_theta(3) == 0.5
    assert srsg_gamma(3) == pytest.approx(8.0)
    assert extrapolation_coefficient(0) == 0.0
    assert extrapolation_coefficient(1) == pytest.approx(-0.5)
    assert extrapolation_coefficient(2) == pytest.approx(0.0)
    assert extrapolation_coefficient(3) == pytest.approx(0.25)
    # (k - 2) / (k + 1) from k = 1 on
    for k in range(1, 50):
        assert extrapolation_coefficient(k) == pytest.approx((k - 2) / (k + 1))


def test_first_steps_on_abs_by_hand(abs_problem):
    state = srsg_init(abs_problem)
    xs = []
    for _ in range(3):
        state = srsg_step(state, abs_problem, None)
        xs.append(state.x_hat[0])
    assert xs == pytest.approx([1.0, 0.85355, 1.04600], abs=1e-5)
    assert state.y[0] == pytest.approx(0.85355, abs=1e-5)


def test_converges_on_abs():
    p = AbsProblem(center=-2.0, lam=0.1)
    tr = srsg_run(ExactOracle(p), 3000, None, TraceOptions(stride=100))
    assert tr.iterates[-1, 0] == pytest.approx(-2.0, abs=0.05)


def test_trace_and_reproducibility(small_problem):
    a = srsg_run(small_problem, 120, trial_stream(2, 0), TraceOptions(stride=25))
    b = srsg_run(small_problem, 120, trial_stream(2, 0), TraceOptions(stride=25))
    assert a.iters.tolist() == [0, 25, 50, 75, 100, 120]
    np.testing.assert_array_equal(a.objective, b.objective)
    assert a.method == "srsg"
    assert np.all(np.isfinite(a.w_sq[:120]))


def test_strongly_convex_prox_is_used():
    p = AbsProblem(center=5.0, lam=0.0, sigma=1.0)
    tr = srsg_run(ExactOracle(p), 3000, None, TraceOptions(stride=100))
    # minimizer of |x - 5| + x^2 / 2 is x = 1
    assert tr.iterates[-1, 0] == pytest.approx(1.0, abs=0.02)


def test_iters_must_be_positive(abs_problem):
    with pytest.raises(ConfigurationError):
        srsg_run(abs_problem, 0, None)

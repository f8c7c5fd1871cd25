import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rqmopt.checks import brute_rqm_prox, brute_srsg_prox
from rqmopt.errors import DegenerateSubproblemError
from rqmopt.prox import EUCLIDEAN, L1Regularizer, phi_eval, phi_gradient_check, rqm_prox, srsg_prox

coord = st.floats(-10, 10)
pos = st.floats(0.01, 10)


def test_rqm_prox_examples():
    np.testing.assert_allclose(rqm_prox([1.0, 0.05], A=1.0, lam=0.1, sigma=0.0, gamma=1.8), [-0.5, 0.0])
    # curvature gamma + A sigma = 2 + 2 * 1
    assert rqm_prox([0.7], A=2.0, lam=0.1, sigma=1.0, gamma=2.0)[0] == pytest.approx(-0.125)


def test_srsg_prox_examples():
    assert srsg_prox([0.5], [1.0], lam=0.25, gamma=1.0)[0] == pytest.approx(0.25)
    assert srsg_prox([2.0], [-1.0], lam=1.0, gamma=2.0)[0] == pytest.approx(-1.5)


def test_srsg_prox_sigma_forms_agree_at_zero():
    w, y = np.array([0.3, -2.0, 5.0]), np.array([1.0, 0.5, -0.2])
    np.testing.assert_allclose(srsg_prox(w, y, 0.4, 3.0, 0.0), srsg_prox(w, y, 0.4, 3.0, 1e-300))


def test_prox_degenerate():
    with pytest.raises(DegenerateSubproblemError):
        rqm_prox([1.0], A=0.0, lam=0.1, sigma=0.0, gamma=0.0)
    with pytest.raises(DegenerateSubproblemError):
        srsg_prox([1.0], [0.0], lam=0.1, gamma=0.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(coord, min_size=1, max_size=4), pos, pos, pos, pos)
def test_rqm_prox_matches_search(s, A, lam, sigma, gamma):
    s = np.array(s)
    expected = brute_rqm_prox(s, A, lam, sigma, gamma)
    np.testing.assert_allclose(rqm_prox(s, A, lam, sigma, gamma), expected, atol=1e-6)


@settings(max_examples=200, deadline=None)
@given(coord, coord, pos, pos, st.floats(0, 5))
def test_srsg_prox_matches_search(w, y, lam, gamma, sigma):
    expected = brute_srsg_prox(np.array([w]), np.array([y]), lam, gamma, sigma)
    np.testing.assert_allclose(srsg_prox([w], [y], lam, gamma, sigma), expected, atol=1e-6)


@given(st.lists(coord, min_size=1, max_size=4), pos, pos, pos, pos)
def test_rqm_prox_optimality(s, A, lam, sigma, gamma):
    # 0 must lie in s + A lam d|x| + (gamma + A sigma) x
    s = np.array(s)
    x = rqm_prox(s, A, lam, sigma, gamma)
    r = s + (gamma + A * sigma) * x
    tol = 1e-9 * (1 + np.abs(s).max() + A * lam)
    nz = x != 0
    assert np.all(np.abs(r[nz] + A * lam * np.sign(x[nz])) <= tol)
    assert np.all(np.abs(r[~nz]) <= A * lam + tol)


def test_phi_example():
    value, grad = phi_eval([-1.0], A=1.0, lam=0.0, sigma=0.0, gamma=2.0)
    assert value == pytest.approx(0.25)
    assert grad[0] == pytest.approx(-0.5)
    value, grad = phi_eval([1.5], A=1.0, lam=0.5, sigma=0.0, gamma=2.0)
    assert value == pytest.approx(0.25)
    assert grad[0] == pytest.approx(0.5)


@given(st.lists(coord, min_size=1, max_size=4), pos, pos, pos, pos)
def test_phi_is_value_of_maximization(s, A, lam, sigma, gamma):
    s = np.array(s)
    value, xs = phi_eval(s, A, lam, sigma, gamma)
    direct = s @ xs - A * (lam * np.abs(xs).sum() + 0.5 * sigma * xs @ xs) - gamma * 0.5 * xs @ xs
    assert value == pytest.approx(direct, rel=1e-9, abs=1e-9)
    # the maximizer of <s, x> - ... is the prox at -s
    np.testing.assert_allclose(xs, rqm_prox(-s, A, lam, sigma, gamma))


@given(st.lists(coord, min_size=1, max_size=4), pos, pos, pos, pos)
def test_phi_gradient_identity(s, A, lam, sigma, gamma):
    assert phi_gradient_check(np.array(s), A, lam, sigma, gamma) <= 1e-5


def test_phi_gradient_check_rejects_bad_step():
    with pytest.raises(ValueError):
        phi_gradient_check([1.0], 1.0, 0.1, 0.0, 1.0, h=0.0)


def test_prox_function_and_regularizer():
    assert EUCLIDEAN(np.array([3.0, 4.0])) == pytest.approx(12.5)
    assert EUCLIDEAN.beta == 1.0
    g = L1Regularizer(lam=0.5, sigma=2.0)
    assert g(np.array([1.0, -2.0])) == pytest.approx(0.5 * 3 + 0.5 * 2 * 5)
    assert g.strongly_convex
    assert not L1Regularizer(lam=0.5).strongly_convex

import numpy as np
import pytest

from rqmopt import checks
from rqmopt.prox import rqm_prox, srsg_prox


def test_argmin_1d_on_shifted_parabolas():
    targets = np.array([-3.7, 0.0, 12.25])

    def delta(c, t):
        return (c + t - targets_b(c)) ** 2 - (c - targets_b(c)) ** 2

    def targets_b(c):
        return targets[:, None] if np.ndim(c) == 2 else targets

    x = checks.argmin_1d(delta, np.zeros(3), np.full(3, 20.0))
    np.testing.assert_allclose(x, targets, atol=1e-9)


def test_brute_force_agrees_with_closed_form_on_kinks():
    s = np.array([0.1, -0.1, 5.0])
    np.testing.assert_allclose(checks.brute_rqm_prox(s, 1.0, 0.1, 0.0, 1.0), rqm_prox(s, 1.0, 0.1, 0.0, 1.0), atol=1e-8)
    w, y = np.array([0.5, -3.0]), np.array([0.0, 1.0])
    np.testing.assert_allclose(checks.brute_srsg_prox(w, y, 0.5, 2.0), srsg_prox(w, y, 0.5, 2.0), atol=1e-8)


def test_prox_check_passes_and_catches_tampering():
    assert checks.check_prox_equivalence(n_instances=200).passed

    def lam_off(s, A, lam, sigma, gamma):
        return rqm_prox(s, A, 1.01 * lam, sigma, gamma)

    def srsg_off(w, y, lam, gamma, sigma=0.0):
        return srsg_prox(w, y, 1.01 * lam, gamma, sigma)

    bad = checks.check_prox_equivalence(n_instances=200, rqm_prox=lam_off)
    assert not bad.passed and bad.margin < 0
    assert not checks.check_prox_equivalence(n_instances=200, srsg_prox=srsg_off).passed


def test_phi_check():
    r = checks.check_phi_gradient(n_instances=20)
    assert r.passed
    assert r.as_dict()["check"] == "phi_gradient"


def test_lyapunov_and_bound_checks_small():
    p = checks.small_instance(1, n_samples=30)
    assert checks.check_lyapunov(p, iters=200, n_refs=3).passed
    assert checks.check_theorem_bound(p, iters=200).passed


def test_report_schema():
    results = [checks.CheckResult("a", True, 0.5, 1.0), checks.CheckResult("b", False, float("-inf"), 2.0)]
    doc = checks.report(results, seed=3)
    assert doc["pass"] is False
    assert doc["seed"] == 3
    for entry in doc["checks"]:
        assert {"check", "pass", "margin", "tolerance"} <= set(entry)
    assert doc["checks"][1]["margin"] == "-inf"


def test_unknown_check_name():
    with pytest.raises(ValueError, match="unknown checks"):
        checks.run_suite(["nope"])


def test_rate_study_small(small_problem):
    study = checks.rate_study(small_problem.with_constants(scale="mean"), "cor1", iters=400, trials=4,
                              window=(40, 400))
    assert study.mean_gap.shape == study.envelope.shape
    assert study.G2 > 0
    names = [r.check for r in checks.rate_checks(study)]
    assert names == ["envelope_cor1", "bound_stochastic_cor1", "rate_slope_cor1"]

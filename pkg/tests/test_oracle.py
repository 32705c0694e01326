"""Tests for the Monte-Carlo oracle estimators."""

import math

import numpy as np
import pytest

from mlr_em.errors import DomainError
from mlr_em.geometry import PlanarState
from mlr_em.model import GroundTruth
from mlr_em.oracle import (
    McEstimate,
    mc_hessian_quadform,
    mc_loglik,
    mc_loglik_grad,
    mc_population_step,
    mc_S_R,
)

STATE = PlanarState(b1=1.0, b1_star=0.6, b2_star=0.8, sigma=1.0)
TRUTH = GroundTruth(beta_star=np.array([0.8, 0.6]), sigma=0.5)


def test_mc_estimate_validation():
    with pytest.raises(DomainError):
        McEstimate(mean=0.0, std_error=0.1, n_draws=100, seed=0)
    with pytest.raises(DomainError):
        mc_population_step(STATE, 100, seed=0)


def test_mc_determinism():
    a = mc_population_step(STATE, 50_000, seed=7)
    b = mc_population_step(STATE, 50_000, seed=7)
    assert a == b
    c = mc_population_step(STATE, 50_000, seed=8)
    assert c[0].mean != a[0].mean


def test_mc_halves_internal_consistency():
    # two disjoint seeds agree within 3 combined standard errors
    for maker in (lambda s: mc_population_step(STATE, 200_000, seed=s)[0],
                  lambda s: mc_S_R(STATE, 200_000, seed=s)[0],
                  lambda s: mc_loglik(np.array([0.5, 0.2]), TRUTH,
                                      200_000, seed=s)):
        a = maker(101)
        b = maker(202)
        combined = math.hypot(a.std_error, b.std_error)
        assert abs(a.mean - b.mean) <= 3.0 * combined


def test_mc_step_at_truth():
    # beta = beta_star is a fixed point: b1' within 3 SE of b1_star
    state = PlanarState(b1=1.0, b1_star=1.0, b2_star=0.0, sigma=0.5)
    est1, est2 = mc_population_step(state, 400_000, seed=3)
    assert abs(est1.mean - 1.0) <= 3.0 * est1.std_error
    assert abs(est2.mean) <= 3.0 * est2.std_error


def test_mc_step_orthogonal_b2_vanishes():
    state = PlanarState(b1=1.0, b1_star=0.0, b2_star=1.0, sigma=1.0)
    _, est2 = mc_population_step(state, 400_000, seed=4)
    assert abs(est2.mean) <= 3.0 * est2.std_error


def test_mc_s_r_matches_quadrature():
    from mlr_em.population import compute_S_R, default_quadrature
    quad = default_quadrature(100)
    S, R = compute_S_R(STATE, quad)
    est_s, est_r = mc_S_R(STATE, 1_000_000, seed=5)
    assert abs(est_s.mean - S) <= 3.0 * est_s.std_error
    assert abs(est_r.mean - R) <= 3.0 * est_r.std_error


def test_mc_loglik_grad_zero_at_stationary_points():
    # stationarity at beta_star
    ests = mc_loglik_grad(TRUTH.beta_star, TRUTH, 1_000_000, seed=6)
    for est in ests:
        assert abs(est.mean) <= 3.0 * est.std_error
    # exactly zero at the origin: tanh(0) kills every draw
    ests0 = mc_loglik_grad(np.zeros(2), TRUTH, 50_000, seed=6)
    for est in ests0:
        assert est.mean == 0.0


def test_mc_loglik_grad_matches_finite_difference():
    beta = np.array([0.4, -0.3])
    h = 1e-3
    seed = 9
    n = 2_000_000
    grads = mc_loglik_grad(beta, TRUTH, n, seed=seed)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        # common random numbers: same seed on both sides cancels MC noise
        lp = mc_loglik(beta + e, TRUTH, n, seed=seed)
        lm = mc_loglik(beta - e, TRUTH, n, seed=seed)
        fd = (lp.mean - lm.mean) / (2 * h)
        assert abs(fd - grads[j].mean) <= 3.0 * grads[j].std_error + 1e-3


def test_mc_hessian_matches_quadrature():
    from mlr_em.population import (
        default_quadrature,
        hessian_quadform_along_bstar,
    )
    quad = default_quadrature(100)
    beta = np.array([0.3, 0.5])
    val = hessian_quadform_along_bstar(beta, TRUTH, quad)
    est = mc_hessian_quadform(beta, TRUTH, 1_000_000, seed=10)
    assert abs(est.mean - val) <= 3.0 * est.std_error

"""Tests for finite-sample EM / Easy-EM steps and the sample-splitting driver."""

import math

import numpy as np
import pytest

from mlr_em.errors import DomainError, NumericalError
from mlr_em.finite import (
    EmConfig,
    easyem_step,
    em_step,
    norm_floor_check,
    run_sample_splitting,
)
from mlr_em.model import GroundTruth, sample_dataset
from mlr_em.population import apply_population_step, default_quadrature


def test_config_validation():
    with pytest.raises(DomainError):
        EmConfig(variant="bogus", n=100, T=10)
    with pytest.raises(DomainError):
        EmConfig(variant="em", n=100, T=0)
    with pytest.raises(DomainError):
        EmConfig(variant="em", n=0, T=1)
    with pytest.raises(DomainError):
        EmConfig(variant="em", n=101, T=10, splitting=True)
    cfg = EmConfig(variant="em", n=100, T=10)
    assert cfg.batch_size == 10
    assert EmConfig(variant="em", n=101, T=10, splitting=False).batch_size == 101
    assert cfg.eps_f(5) == pytest.approx(math.sqrt(5 / 10 * math.log(100)))


def test_single_sample_closed_form():
    xs = np.array([[1.0]])
    ys = np.array([1.0])
    out = em_step(np.array([1.0]), xs, ys, 1.0)
    assert out[0] == pytest.approx(math.tanh(1.0))
    out2 = easyem_step(np.array([1.0]), xs, ys, 1.0)
    assert out2[0] == pytest.approx(math.tanh(1.0))


def test_em_step_requires_enough_rows():
    xs = np.ones((1, 2))
    with pytest.raises(DomainError):
        em_step(np.ones(2), xs, np.ones(1), 1.0)
    with pytest.raises(DomainError):
        easyem_step(np.ones(2), np.ones((0, 2)), np.ones(0), 1.0)


def test_em_step_singular_covariance():
    # duplicated rows make the sample covariance rank one
    xs = np.tile(np.array([[1.0, 2.0]]), (5, 1))
    with pytest.raises(NumericalError):
        em_step(np.ones(2), xs, np.ones(5), 1.0)


def test_em_matches_easyem_when_covariance_is_identity():
    # d=1 data rescaled so the empirical second moment is exactly 1
    rng = np.random.default_rng(0)
    xs = rng.standard_normal((50, 1))
    xs /= np.sqrt(np.mean(xs**2))
    ys = rng.standard_normal(50)
    beta = np.array([0.4])
    a = em_step(beta, xs, ys, 0.7)
    b = easyem_step(beta, xs, ys, 0.7)
    np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("stepper", [em_step, easyem_step])
def test_steps_concentrate_on_population(stepper):
    n, d = 1_000_000, 2
    truth = GroundTruth(beta_star=np.array([1.0, 0.0]), sigma=0.5)
    ds = sample_dataset(truth, n, seed=21)
    beta = np.array([0.5, 0.5])
    finite = stepper(beta, ds.xs, ds.ys, truth.sigma)
    quad = default_quadrature(100)
    pop, _ = apply_population_step(beta, truth.beta_star, truth.sigma, quad)
    tol = 5.0 * math.sqrt(d / n) * math.sqrt(truth.sigma**2 + truth.norm**2)
    assert np.linalg.norm(finite - pop) <= tol


def test_em_easyem_agreement_at_scale():
    n, d = 300_000, 3
    truth = GroundTruth(beta_star=np.array([1.0, 0.0, 0.0]), sigma=0.4)
    ds = sample_dataset(truth, n, seed=22)
    beta = np.array([0.3, 0.4, -0.2])
    a = em_step(beta, ds.xs, ds.ys, truth.sigma)
    b = easyem_step(beta, ds.xs, ds.ys, truth.sigma)
    tol = 10.0 * math.sqrt(d / n) * math.sqrt(truth.sigma**2 + truth.norm**2)
    assert np.linalg.norm(a - b) <= tol


def test_run_determinism():
    truth = GroundTruth(beta_star=np.array([1.0, 0.0, 0.0]), sigma=0.5)
    cfg = EmConfig(variant="em", n=3000, T=5, seed=33)
    beta0 = np.array([0.5, 0.5, 0.5])
    a = run_sample_splitting(cfg, truth, beta0)
    b = run_sample_splitting(cfg, truth, beta0)
    assert [r.l2_error for r in a] == [r.l2_error for r in b]
    assert [r.cos_theta for r in a] == [r.cos_theta for r in b]


def test_run_batches_and_records():
    truth = GroundTruth(beta_star=np.array([1.0, 0.0]), sigma=0.5)
    cfg = EmConfig(variant="em", n=1000, T=4, seed=1)
    records = run_sample_splitting(cfg, truth, np.array([0.4, 0.3]))
    assert len(records) == 5
    assert records[0].iter == 0 and records[0].variant_used == "init"
    for t, r in enumerate(records[1:]):
        assert (r.batch_start, r.batch_end) == (t * 250, (t + 1) * 250)
        assert r.variant_used == "em"
        assert math.isfinite(r.cond_number)
    # practical mode reuses the whole sample every iteration
    cfg2 = EmConfig(variant="easyem", n=1000, T=4, splitting=False, seed=1)
    records2 = run_sample_splitting(cfg2, truth, np.array([0.4, 0.3]))
    for r in records2[1:]:
        assert (r.batch_start, r.batch_end) == (0, 1000)
        assert r.variant_used == "easyem"
        assert math.isnan(r.cond_number)


def test_run_rejects_zero_start():
    truth = GroundTruth(beta_star=np.array([1.0, 0.0]), sigma=0.5)
    cfg = EmConfig(variant="em", n=100, T=2, seed=0)
    with pytest.raises(DomainError):
        run_sample_splitting(cfg, truth, np.zeros(2))


def test_run_start_at_truth_stays_near_truth():
    truth = GroundTruth(beta_star=np.array([1.0, 0.0, 0.0, 0.0]), sigma=0.2)
    cfg = EmConfig(variant="em", n=50_000, T=10, seed=5)
    records = run_sample_splitting(cfg, truth, truth.beta_star.copy())
    eps_f = cfg.eps_f(truth.d)
    for r in records:
        assert r.l2_error <= 2.0 * eps_f


def test_near_consistency_at_truth_small_noise():
    truth = GroundTruth(beta_star=np.array([1.0, 0.0]), sigma=1e-3)
    ds = sample_dataset(truth, 10_000, seed=6)
    out = em_step(truth.beta_star, ds.xs, ds.ys, truth.sigma)
    assert np.linalg.norm(out - truth.beta_star) <= 1e-2


def test_twophase_switches_to_em():
    d = 32
    truth = GroundTruth(
        beta_star=np.concatenate([[1.0], np.zeros(d - 1)]), sigma=0.2)
    cfg = EmConfig(variant="twophase", n=200_000, T=20, seed=9)
    beta0 = np.full(d, 1.0 / math.sqrt(d))
    records = run_sample_splitting(cfg, truth, beta0)
    variants = [r.variant_used for r in records[1:]]
    assert variants[0] == "easyem"
    assert "em" in variants
    # once switched, it never goes back
    first_em = variants.index("em")
    assert all(v == "em" for v in variants[first_em:])
    # the switch fires no later than ceil(log2 d) easy steps
    assert variants[:first_em].count("easyem") <= math.ceil(math.log2(d))


def test_norm_floor_check():
    truth_norm = 1.0

    class R:
        def __init__(self, norm):
            self.norm = norm

    assert norm_floor_check([R(0.5), R(0.3), R(0.11)], truth_norm) is True
    assert norm_floor_check([R(0.5), R(0.05)], truth_norm) is False
    assert norm_floor_check([R(0.05), R(0.5)], truth_norm) is None
    with pytest.raises(DomainError):
        norm_floor_check([], truth_norm)

"""Tests for the ground-truth model and dataset sampling."""

import math

import numpy as np
import pytest

from mlr_em.errors import DomainError
from mlr_em.model import (
    GroundTruth,
    random_init,
    sample_dataset,
    write_dataset_csv,
)


def test_ground_truth_validation():
    with pytest.raises(DomainError):
        GroundTruth(beta_star=np.array([1.0]), sigma=0.0)
    with pytest.raises(DomainError):
        GroundTruth(beta_star=np.array([1.0]), sigma=-1.0)
    with pytest.raises(DomainError):
        GroundTruth(beta_star=np.zeros(3), sigma=1.0)
    with pytest.raises(DomainError):
        GroundTruth(beta_star=np.zeros((2, 2)), sigma=1.0)


def test_snr_is_norm_over_sigma():
    truth = GroundTruth(beta_star=np.array([3.0, 4.0]), sigma=2.0)
    assert truth.snr() == 2.5
    assert truth.d == 2
    assert truth.norm == 5.0


def test_sample_dataset_model_identity():
    truth = GroundTruth(beta_star=np.array([1.0, 0.0]), sigma=0.5)
    ds = sample_dataset(truth, 3, seed=7)
    assert ds.n == 3 and ds.d == 2
    zs = ds.latent_labels()
    resid = ds.ys - zs * (ds.xs @ truth.beta_star)
    # reconstructing y from (x, z) plus the recovered residual is bit-exact
    np.testing.assert_array_equal(
        zs * (ds.xs @ truth.beta_star) + resid, ds.ys)
    assert set(np.unique(zs)) <= {-1.0, 1.0}


def test_sample_dataset_noiseless_limit():
    truth = GroundTruth(beta_star=np.array([1.0]), sigma=1e-9)
    ds = sample_dataset(truth, 1000, seed=1)
    np.testing.assert_allclose(np.abs(ds.ys), np.abs(ds.xs[:, 0]), atol=1e-7)


def test_sample_dataset_determinism_and_extension():
    truth = GroundTruth(beta_star=np.array([1.0, 2.0]), sigma=0.3)
    a = sample_dataset(truth, 200, seed=42)
    b = sample_dataset(truth, 200, seed=42)
    np.testing.assert_array_equal(a.xs, b.xs)
    np.testing.assert_array_equal(a.ys, b.ys)
    # growing n extends rows instead of reshuffling them
    big = sample_dataset(truth, 400, seed=42)
    np.testing.assert_array_equal(big.xs[:200], a.xs)
    np.testing.assert_array_equal(big.ys[:200], a.ys)
    other = sample_dataset(truth, 200, seed=43)
    assert not np.array_equal(other.ys, a.ys)


def test_second_moment_of_y():
    truth = GroundTruth(beta_star=np.array([0.6, 0.8]), sigma=0.5)
    ds = sample_dataset(truth, 1_000_000, seed=5)
    expected = truth.sigma**2 + truth.norm**2
    assert abs(np.mean(ds.ys**2) - expected) <= 0.01 * expected


def test_label_mean_and_covariance_concentration():
    d, n = 5, 100_000
    truth = GroundTruth(beta_star=np.ones(d), sigma=1.0)
    ds = sample_dataset(truth, n, seed=11)
    assert abs(np.mean(ds.latent_labels())) <= 4.0 / math.sqrt(n)
    cov = ds.xs.T @ ds.xs / n
    dev = np.linalg.norm(cov - np.eye(d), ord=2)
    assert dev <= 3.0 * math.sqrt(d / n)


def test_batch_ranges():
    truth = GroundTruth(beta_star=np.array([1.0]), sigma=1.0)
    ds = sample_dataset(truth, 10, seed=0)
    xs, ys = ds.batch(2, 5)
    assert xs.shape == (3, 1) and ys.shape == (3,)
    for bad in [(-1, 5), (5, 5), (5, 2), (0, 11)]:
        with pytest.raises(DomainError):
            ds.batch(*bad)


def test_random_init_basics():
    v = random_init(1, 2.0, seed=3)
    assert v.shape == (1,) and abs(v[0]) == pytest.approx(2.0)
    a = random_init(8, 1.5, seed=9)
    b = random_init(8, 1.5, seed=9)
    np.testing.assert_array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        random_init(0, 1.0, seed=0)
    with pytest.raises(DomainError):
        random_init(3, 0.0, seed=0)


def test_random_init_uniform_on_sphere():
    # E[|cos angle(init, e1)|] = sqrt(2/(pi*d)) for a uniform direction
    d = 10_000
    vals = [abs(random_init(d, 1.0, seed=s)[0]) for s in range(1000)]
    expected = math.sqrt(2.0 / (math.pi * d))
    assert abs(np.mean(vals) - expected) <= 0.1 * expected


def test_dataset_csv_dump(tmp_path):
    truth = GroundTruth(beta_star=np.array([1.0, -0.5]), sigma=0.4)
    ds = sample_dataset(truth, 5, seed=2)
    path = tmp_path / "data.csv"
    write_dataset_csv(ds, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "i,y,x_0,x_1"
    assert len(lines) == 6
    path2 = tmp_path / "with_labels.csv"
    write_dataset_csv(ds, path2, emit_labels=True)
    assert path2.read_text().splitlines()[0] == "i,y,x_0,x_1,z"

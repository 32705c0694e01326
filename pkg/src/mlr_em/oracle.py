"""Independent Monte-Carlo oracles for the deterministic quadrature kernels.

Every quantity the population module computes by quadrature (the planar
update, S/R, log-likelihood, gradient, Hessian form) has a sampling-based
estimator here. The estimators draw the raw model variables (covariate
coordinates, hidden label, noise) so they share no code path with the
quadrature: agreement within standard errors certifies both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import PlanarState
from .model import GroundTruth

_MIN_DRAWS = 10_000
_CHUNK = 2_000_000


@dataclass(frozen=True)
class McEstimate:
    """A Monte-Carlo mean with its standard error and provenance."""

    mean: float
    std_error: float
    n_draws: int
    seed: int

    def __post_init__(self):
        if self.n_draws < _MIN_DRAWS:
            raise DomainError(f"n_draws must be >= {_MIN_DRAWS}")


class _Accumulator:
    """Streaming mean / standard-error accumulator over chunks."""

    def __init__(self, width: int = 1):
        self.n = 0
        self.total = np.zeros(width)
        self.total_sq = np.zeros(width)

    def add(self, draws: np.ndarray):
        draws = np.atleast_2d(draws.T).T if draws.ndim == 1 else draws
        self.n += draws.shape[0]
        self.total += draws.sum(axis=0)
        self.total_sq += (draws * draws).sum(axis=0)

    def estimates(self, seed: int) -> list[McEstimate]:
        mean = self.total / self.n
        var = np.maximum(0.0, self.total_sq / self.n - mean * mean)
        var *= self.n / max(1, self.n - 1)
        se = np.sqrt(var / self.n)
        return [McEstimate(mean=float(m), std_error=float(s),
                           n_draws=self.n, seed=seed)
                for m, s in zip(mean, se)]


def _chunks(n_draws: int):
    done = 0
    while done < n_draws:
        size = min(_CHUNK, n_draws - done)
        done += size
        yield size


def mc_population_step(state: PlanarState, n_draws: int,
                       seed: int) -> tuple[McEstimate, McEstimate]:
    """MC estimate of (b1', b2') for one planar population EM update.

    Draws the model directly in the planar frame: covariate coordinates
    (a1, a2) ~ N(0,1), label z = +/-1, noise e ~ N(0, sigma^2), response
    y = z*(a1*b1_star + a2*b2_star) + e, then averages
    tanh(b1*a1*y/sigma^2) * y * (a1, a2).
    """
    if n_draws < _MIN_DRAWS:
        raise DomainError(f"n_draws must be >= {_MIN_DRAWS}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sigma_sq = state.sigma**2
    acc = _Accumulator(width=2)
    for size in _chunks(n_draws):
        a1 = rng.standard_normal(size)
        a2 = rng.standard_normal(size)
        z = 2.0 * rng.integers(0, 2, size=size) - 1.0
        e = state.sigma * rng.standard_normal(size)
        y = z * (a1 * state.b1_star + a2 * state.b2_star) + e
        w = np.tanh(state.b1 * a1 * y / sigma_sq) * y
        acc.add(np.column_stack([w * a1, w * a2]))
    est1, est2 = acc.estimates(seed)
    return est1, est2


def mc_S_R(state: PlanarState, n_draws: int,
           seed: int) -> tuple[McEstimate, McEstimate]:
    """MC estimate of the S and R integrals from their defining expectations."""
    if n_draws < _MIN_DRAWS:
        raise DomainError(f"n_draws must be >= {_MIN_DRAWS}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sigma_sq = state.sigma**2
    sigma2 = state.sigma2
    scale = sigma_sq + state.b1_star**2 + state.b2_star**2
    acc = _Accumulator(width=2)
    for size in _chunks(n_draws):
        a1 = rng.standard_normal(size)
        y = sigma2 * rng.standard_normal(size)
        u = (a1 * state.b1 / sigma_sq) * (y + a1 * state.b1_star)
        t = np.tanh(u)
        tp = 1.0 - t * t
        s_draw = t + u * tp
        r_draw = scale * (a1 * a1 * state.b1 / sigma_sq) * tp
        acc.add(np.column_stack([s_draw, r_draw]))
    est_s, est_r = acc.estimates(seed)
    return est_s, est_r


def mc_loglik(beta: np.ndarray, truth: GroundTruth, n_draws: int,
              seed: int) -> McEstimate:
    """MC estimate of the population log-likelihood at beta."""
    if n_draws < _MIN_DRAWS:
        raise DomainError(f"n_draws must be >= {_MIN_DRAWS}")
    beta = np.asarray(beta, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sigma_sq = truth.sigma**2
    log_norm = -0.5 * math.log(2.0 * math.pi * sigma_sq)
    acc = _Accumulator(width=1)
    for size in _chunks(n_draws):
        xs = rng.standard_normal((size, truth.d))
        z = 2.0 * rng.integers(0, 2, size=size) - 1.0
        e = truth.sigma * rng.standard_normal(size)
        y = z * (xs @ truth.beta_star) + e
        m = xs @ beta
        lp = -0.5 * (y - m) ** 2 / sigma_sq
        lm = -0.5 * (y + m) ** 2 / sigma_sq
        ll = log_norm - math.log(2.0) + np.logaddexp(lp, lm)
        acc.add(ll)
    return acc.estimates(seed)[0]


def mc_loglik_grad(beta: np.ndarray, truth: GroundTruth, n_draws: int,
                   seed: int) -> list[McEstimate]:
    """MC estimate of grad L = (1/sigma^2)(-beta + E[y X tanh(y<X,beta>/s^2)]).

    Returns one McEstimate per coordinate.
    """
    if n_draws < _MIN_DRAWS:
        raise DomainError(f"n_draws must be >= {_MIN_DRAWS}")
    beta = np.asarray(beta, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sigma_sq = truth.sigma**2
    acc = _Accumulator(width=truth.d)
    for size in _chunks(n_draws):
        xs = rng.standard_normal((size, truth.d))
        z = 2.0 * rng.integers(0, 2, size=size) - 1.0
        e = truth.sigma * rng.standard_normal(size)
        y = z * (xs @ truth.beta_star) + e
        w = np.tanh((xs @ beta) * y / sigma_sq) * y
        draws = (w[:, None] * xs - beta[None, :]) / sigma_sq
        acc.add(draws)
    return acc.estimates(seed)


def mc_hessian_quadform(beta: np.ndarray, truth: GroundTruth, n_draws: int,
                        seed: int) -> McEstimate:
    """MC estimate of <bhat*, H bhat*> of the population log-likelihood."""
    if n_draws < _MIN_DRAWS:
        raise DomainError(f"n_draws must be >= {_MIN_DRAWS}")
    beta = np.asarray(beta, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sigma_sq = truth.sigma**2
    bhat = truth.beta_star / truth.norm
    acc = _Accumulator(width=1)
    for size in _chunks(n_draws):
        xs = rng.standard_normal((size, truth.d))
        z = 2.0 * rng.integers(0, 2, size=size) - 1.0
        e = truth.sigma * rng.standard_normal(size)
        y = z * (xs @ truth.beta_star) + e
        t = np.tanh((xs @ beta) * y / sigma_sq)
        draws = ((y * y / sigma_sq) * (xs @ bhat) ** 2 * (1.0 - t * t) - 1.0) \
            / sigma_sq
        acc.add(draws)
    return acc.estimates(seed)[0]

"""Finite-sample EM / Easy-EM steps and the sample-splitting driver.

One EM step reweights samples by tanh(<beta, x_i> y_i / sigma^2) and solves
the weighted normal equation; Easy-EM replaces the sample covariance by its
expectation (the identity) and skips the solve. The driver runs T iterations
on disjoint fresh batches (sample splitting) or on the full sample
("practical mode"), and supports a two-phase Easy-EM-then-EM schedule.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import DomainError, NumericalError
from .geometry import angle_metrics, signed_error
from .model import Dataset, GroundTruth, sample_dataset

logger = logging.getLogger(__name__)

VARIANTS = ("em", "easyem", "twophase")
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class EmConfig:
    """Driver configuration for a finite-sample run."""

    variant: str
    n: int
    T: int
    splitting: bool = True
    switch_threshold: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}")
        if self.T < 1:
            raise DomainError("T must be >= 1")
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.splitting and self.n % self.T != 0:
            raise DomainError("splitting requires n divisible by T")

    @property
    def batch_size(self) -> int:
        return self.n // self.T if self.splitting else self.n

    def eps_f(self, d: int) -> float:
        """Working statistical fluctuation scale sqrt((d/batch) * log n)."""
        return math.sqrt(d / self.batch_size * math.log(self.n))


@dataclass(frozen=True)
class TrajectoryRecord:
    """Per-iteration metrics of a finite-sample run."""

    iter: int
    cos_theta: float
    sin_theta: float
    l2_error: float
    norm: float
    variant_used: str
    cond_number: float = math.nan
    batch_start: int = -1
    batch_end: int = -1
    bound_checks: dict = field(default_factory=dict)


def _weighted_moment(beta, xs, ys, sigma):
    w = np.tanh((xs @ beta) * ys / sigma**2) * ys
    return (xs.T @ w) / xs.shape[0]


def em_step(beta: np.ndarray, xs: np.ndarray, ys: np.ndarray, sigma: float,
            return_cond: bool = False):
    """One finite-sample EM update: solve Sigma_hat beta' = mu_hat.

    The sample covariance is factored with partial pivoting (no explicit
    inverse); its condition number is logged and a value above 1e12 raises
    NumericalError (the batch is too small or degenerate).
    """
    beta = np.asarray(beta, dtype=float)
    n, d = xs.shape
    if n < d:
        raise DomainError("EM step needs batch size >= d")
    mu = _weighted_moment(beta, xs, ys, sigma)
    cov = (xs.T @ xs) / n
    cond = float(np.linalg.cond(cov))
    logger.debug("em_step: covariance condition number %.3e", cond)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise NumericalError(
            f"sample covariance condition number {cond:.3e} exceeds "
            f"{_COND_LIMIT:.0e}; use a larger batch")
    new_beta = lu_solve(lu_factor(cov), mu)
    if return_cond:
        return new_beta, cond
    return new_beta


def easyem_step(beta: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                sigma: float) -> np.ndarray:
    """One Easy-EM update: the weighted moment with no covariance solve."""
    if xs.shape[0] < 1:
        raise DomainError("empty batch")
    return _weighted_moment(np.asarray(beta, dtype=float), xs, ys, sigma)


def run_sample_splitting(config: EmConfig, truth: GroundTruth,
                         beta0: np.ndarray,
                         dataset: Dataset | None = None) -> list[TrajectoryRecord]:
    """Run T finite-sample iterations; returns T+1 records (incl. iter 0).

    In splitting mode iteration t consumes the disjoint batch
    [t*n/T, (t+1)*n/T); otherwise every iteration reuses all n rows. The
    twophase variant runs Easy-EM until the observable switch criterion
    fires - the cosine between successive iterates stabilizes above
    switch_threshold (default 1 - eps_f) or ceil(log2 d) Easy-EM steps have
    run - then switches to EM.
    """
    beta = np.asarray(beta0, dtype=float)
    if np.linalg.norm(beta) == 0.0:
        raise DomainError("beta0 must be nonzero")
    if dataset is None:
        dataset = sample_dataset(truth, config.n, config.seed)
    if dataset.n < config.n:
        raise DomainError("dataset smaller than config.n")

    d = truth.d
    threshold = config.switch_threshold
    if threshold is None:
        threshold = max(0.5, 1.0 - config.eps_f(d))
    easy_cap = max(1, math.ceil(math.log2(d))) if d > 1 else 1

    def metrics(b):
        cos, sin, _ = angle_metrics(b, truth.beta_star)
        return cos, sin, signed_error(b, truth.beta_star), float(np.linalg.norm(b))

    cos, sin, err, norm = metrics(beta)
    records = [TrajectoryRecord(iter=0, cos_theta=cos, sin_theta=sin,
                                l2_error=err, norm=norm, variant_used="init")]
    switched = config.variant != "twophase"
    easy_steps = 0
    batch = config.batch_size
    for t in range(config.T):
        if config.splitting:
            start, end = t * batch, (t + 1) * batch
        else:
            start, end = 0, config.n
        xs, ys = dataset.batch(start, end)
        if config.variant == "em":
            use_easy = False
        elif config.variant == "easyem":
            use_easy = True
        else:
            use_easy = not switched
        cond = math.nan
        if use_easy:
            new_beta = easyem_step(beta, xs, ys, truth.sigma)
            easy_steps += 1
        else:
            new_beta, cond = em_step(beta, xs, ys, truth.sigma, return_cond=True)
        if config.variant == "twophase" and not switched:
            nb, nn = np.linalg.norm(beta), np.linalg.norm(new_beta)
            proxy = abs(float(beta @ new_beta)) / (nb * nn) if nb * nn > 0 else 0.0
            if proxy >= threshold or easy_steps >= easy_cap:
                switched = True
        beta = new_beta
        cos, sin, err, norm = metrics(beta)
        records.append(TrajectoryRecord(
            iter=t + 1, cos_theta=cos, sin_theta=sin, l2_error=err, norm=norm,
            variant_used="easyem" if use_easy else "em", cond_number=cond,
            batch_start=start, batch_end=end))
    return records


def norm_floor_check(records: list, beta_star_norm: float) -> bool | None:
    """Norm-floor gate: every iterate norm >= |beta_star|/10.

    Returns None (skipped) when the initial norm is already below the floor,
    so the lemma's hypothesis fails.
    """
    if not records:
        raise DomainError("empty trajectory")
    floor = beta_star_norm / 10.0
    if records[0].norm < floor:
        return None
    return all(r.norm >= floor for r in records)

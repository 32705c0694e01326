"""Ground-truth model and seeded synthetic dataset generation.

The data model is two-component mixed linear regression:

    y_i = z_i * <beta_star, x_i> + e_i

with hidden labels z_i uniform on {-1, +1}, covariates x_i ~ N(0, I_d) and
noise e_i ~ N(0, sigma^2). The noise level sigma is treated as known.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class GroundTruth:
    """The planted model: direction/scale beta_star and known noise sigma."""

    beta_star: np.ndarray
    sigma: float

    def __post_init__(self):
        beta = np.asarray(self.beta_star, dtype=float)
        object.__setattr__(self, "beta_star", beta)
        if beta.ndim != 1 or beta.shape[0] < 1:
            raise DomainError("beta_star must be a nonempty 1-D vector")
        if not np.linalg.norm(beta) > 0:
            raise DomainError("beta_star must be nonzero")
        if not self.sigma > 0:
            raise DomainError("sigma must be strictly positive")

    @property
    def d(self) -> int:
        return self.beta_star.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.beta_star))

    def snr(self) -> float:
        """Signal-to-noise ratio eta = norm(beta_star) / sigma."""
        return self.norm / self.sigma


@dataclass(frozen=True)
class Dataset:
    """Covariates and responses, with latent labels firewalled.

    The labels are stored for diagnostics only; EM operations receive the
    (xs, ys) arrays and structurally cannot read them.
    """

    xs: np.ndarray
    ys: np.ndarray
    seed: int
    _zs: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    def latent_labels(self) -> np.ndarray:
        """Diagnostics-only accessor for the hidden sign labels."""
        return self._zs

    def batch(self, start: int, end: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (xs, ys) views for the half-open row range [start, end)."""
        if not 0 <= start < end <= self.n:
            raise DomainError(f"invalid batch range [{start}, {end})")
        return self.xs[start:end], self.ys[start:end]


def _purpose_rngs(seed: int) -> tuple[np.random.Generator, ...]:
    """Split one root seed into independent streams per sampling purpose.

    Streams are ordered (covariates, labels, noise). Because each purpose
    owns its own stream and draws row-major, growing n extends earlier rows
    instead of reshuffling them.
    """
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def sample_dataset(truth: GroundTruth, n: int, seed: int) -> Dataset:
    """Draw n i.i.d. rows of the mixed linear regression model."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng_x, rng_z, rng_e = _purpose_rngs(seed)
    xs = rng_x.standard_normal((n, truth.d))
    zs = 2.0 * rng_z.integers(0, 2, size=n) - 1.0
    es = truth.sigma * rng_e.standard_normal(n)
    ys = zs * (xs @ truth.beta_star) + es
    return Dataset(xs=xs, ys=ys, seed=seed, _zs=zs)


def random_init(d: int, scale: float, seed: int) -> np.ndarray:
    """Uniform point on the sphere of radius `scale` in d dimensions."""
    if d < 1:
        raise DomainError("d must be >= 1")
    if not scale > 0:
        raise DomainError("scale must be > 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    v = rng.standard_normal(d)
    norm = np.linalg.norm(v)
    while norm == 0.0:  # pragma: no cover - probability zero
        v = rng.standard_normal(d)
        norm = np.linalg.norm(v)
    return scale * v / norm


def write_dataset_csv(dataset: Dataset, path, emit_labels: bool = False) -> None:
    """Dump a dataset as CSV: columns i, y, x_0..x_{d-1} [, z]."""
    header = ["i", "y"] + [f"x_{j}" for j in range(dataset.d)]
    if emit_labels:
        header.append("z")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        zs = dataset.latent_labels()
        for i in range(dataset.n):
            row = [i, repr(float(dataset.ys[i]))]
            row += [repr(float(v)) for v in dataset.xs[i]]
            if emit_labels:
                row.append(repr(float(zs[i])))
            writer.writerow(row)

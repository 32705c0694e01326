"""Shared fixtures and state generators for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from mlr_em.geometry import PlanarState
from mlr_em.population import default_quadrature


@pytest.fixture(scope="session")
def quad():
    return default_quadrature(100)


def random_planar_state(rng: np.random.Generator, eta: float,
                        sigma: float = 1.0,
                        theta_range: tuple = (0.0, math.pi / 2),
                        b1_range: tuple = (0.05, 3.0)) -> PlanarState:
    """Random planar state at SNR eta with theta in the given open range."""
    bs_norm = eta * sigma
    lo, hi = theta_range
    theta = float(rng.uniform(lo + 1e-6, hi - 1e-6))
    b1 = float(rng.uniform(*b1_range)) * math.sqrt(sigma**2 + bs_norm**2)
    return PlanarState(b1=b1, b1_star=bs_norm * math.cos(theta),
                       b2_star=bs_norm * math.sin(theta), sigma=sigma)

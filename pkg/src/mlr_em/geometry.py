"""Planar reduction of an iterate against beta_star, and angle metrics.

The population EM update leaves span(beta, beta_star) invariant, so all of
its analysis happens in the orthonormal frame (v1, v2) with v1 = beta/|beta|
and v2 the component of beta_star orthogonal to v1 (normalized). The planar
coordinates are b1 = |beta|, b1_star = <beta_star, v1> (sign retained) and
b2_star = <beta_star, v2> >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_FRAME_TOL = 1e-10


@dataclass(frozen=True)
class PlanarState:
    """2-D reduction (b1, b1_star, b2_star, sigma) of an iterate."""

    b1: float
    b1_star: float
    b2_star: float
    sigma: float

    def __post_init__(self):
        if self.b1 < 0:
            raise DomainError("b1 must be >= 0")
        if self.b2_star < 0:
            raise DomainError("b2_star must be >= 0")
        if not self.sigma > 0:
            raise DomainError("sigma must be > 0")

    @property
    def sigma2_sq(self) -> float:
        """Effective conditional variance sigma^2 + b2_star^2."""
        return self.sigma**2 + self.b2_star**2

    @property
    def sigma2(self) -> float:
        return math.sqrt(self.sigma2_sq)

    @property
    def beta_star_norm(self) -> float:
        return math.hypot(self.b1_star, self.b2_star)

    @property
    def snr(self) -> float:
        return self.beta_star_norm / self.sigma

    @property
    def theta(self) -> float:
        """Folded angle between the iterate direction and +/-beta_star."""
        return math.atan2(self.b2_star, abs(self.b1_star))


def reduce(beta: np.ndarray, beta_star: np.ndarray, sigma: float) -> PlanarState:
    """Reduce (beta, beta_star, sigma) to planar coordinates."""
    beta = np.asarray(beta, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    if beta.shape != beta_star.shape:
        raise DomainError("beta and beta_star must share a dimension")
    b1 = float(np.linalg.norm(beta))
    bs_norm = float(np.linalg.norm(beta_star))
    if b1 == 0.0 or bs_norm == 0.0:
        raise DomainError("zero vector passed to reduce")
    b1_star = float(beta_star @ beta) / b1
    # the orthogonal component via the projected residual, not
    # sqrt(|beta_star|^2 - b1_star^2): the difference form loses all digits
    # once the angle drops below sqrt(eps) and stalls convergence there
    v1 = beta / b1
    resid = beta_star - (beta_star @ v1) * v1
    resid -= (resid @ v1) * v1
    b2_star = float(np.linalg.norm(resid))
    return PlanarState(b1=b1, b1_star=b1_star, b2_star=b2_star, sigma=float(sigma))


def planar_frame(beta: np.ndarray, beta_star: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal frame (v1, v2) of span(beta, beta_star).

    v1 = beta/|beta|; v2 completes the plane so that <beta_star, v2> >= 0.
    For beta parallel to beta_star the plane is degenerate and v2 is an
    arbitrary unit vector orthogonal to v1.
    """
    beta = np.asarray(beta, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    b1 = np.linalg.norm(beta)
    if b1 == 0.0:
        raise DomainError("zero beta has no direction")
    v1 = beta / b1
    resid = beta_star - (beta_star @ v1) * v1
    # second projection pass: one pass loses orthogonality to cancellation
    # when beta is nearly parallel to beta_star
    resid -= (resid @ v1) * v1
    rnorm = np.linalg.norm(resid)
    if rnorm > _FRAME_TOL * max(1.0, np.linalg.norm(beta_star)):
        v2 = resid / rnorm
    else:
        # degenerate plane: pick any unit vector orthogonal to v1
        idx = int(np.argmin(np.abs(v1)))
        e = np.zeros_like(v1)
        e[idx] = 1.0
        v2 = e - (e @ v1) * v1
        v2 /= np.linalg.norm(v2)
    return v1, v2


def lift(coords, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Map planar coordinates (c1, c2) back to coords[0]*v1 + coords[1]*v2."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    c1, c2 = float(coords[0]), float(coords[1])
    if abs(v1 @ v1 - 1.0) > 1e-9 or abs(v2 @ v2 - 1.0) > 1e-9:
        raise DomainError("frame vectors must be unit norm")
    if abs(v1 @ v2) > 1e-9:
        raise DomainError("frame vectors must be orthogonal")
    return c1 * v1 + c2 * v2


def angle_metrics(beta: np.ndarray, beta_star: np.ndarray) -> tuple[float, float, float]:
    """(cos, sin, theta) of the angle folded to [0, pi/2].

    Folding identifies beta_star with -beta_star, matching the model's sign
    symmetry: convergence to either of the pair counts as success.
    """
    beta = np.asarray(beta, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    nb = np.linalg.norm(beta)
    ns = np.linalg.norm(beta_star)
    if nb == 0.0 or ns == 0.0:
        raise DomainError("zero vector has no angle")
    cos = min(1.0, float(abs(beta @ beta_star) / (nb * ns)))
    sin = math.sqrt(max(0.0, 1.0 - cos * cos))
    return cos, sin, math.atan2(sin, cos)


def signed_error(beta: np.ndarray, beta_star: np.ndarray) -> float:
    """min(|beta - beta_star|, |beta + beta_star|)."""
    beta = np.asarray(beta, dtype=float)
    beta_star = np.asarray(beta_star, dtype=float)
    return float(
        min(np.linalg.norm(beta - beta_star), np.linalg.norm(beta + beta_star))
    )

"""Per-iteration verification of the convergence theorems on trajectories.

Each check compares a recorded quantity against its theorem bound and
reports (lhs, rhs, margin, pass). Margins are signed so that positive means
satisfied; a check whose hypotheses (angle range, SNR regime, norm floor)
fail is reported as not applicable rather than failed.

Checked bounds (theorem_id):
- Cos-T2: cosine growth cos t' >= kappa(eta) * cos t for pi/3 <= t < pi/2
- Sin-T3: sine contraction sin t' <= kappa(t, eta) * sin t for t < pi/2
- Dist-T4: per-step distance contraction for t < pi/8 (two-case split)
- Corollary1: multi-step distance envelope from the kappa candidates
- FiniteCos-T6 / EasyEM-T8: finite-sample cosine growth with eps_f slack
- FiniteSin: finite-sample squared-sine contraction with eps_f slack
- FiniteDist-lowSNR / FiniteDist-highSNR: finite distance contraction
- NormFloor: every iterate keeps norm >= |beta_star|/10
- Bounded: every update lands inside the ball 3*sqrt(sigma^2+|beta_star|^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .geometry import PlanarState
from .model import GroundTruth

POP_SLACK = 1e-6
BOUNDED_SLACK = 1e-9
HIGH_SNR_ETA = 10.0
FINITE_C = 10.0

THEOREM_IDS = (
    "Cos-T2", "Sin-T3", "Dist-T4", "Corollary1", "FiniteCos-T6", "FiniteSin",
    "FiniteDist-lowSNR", "FiniteDist-highSNR", "EasyEM-T8", "NormFloor",
    "Bounded",
)


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one theorem check at one iteration."""

    theorem_id: str
    iter: int
    applicable: bool
    lhs: float
    rhs: float
    margin: float
    passed: bool


def kappa_cosine(eta: float) -> float:
    """Per-step cosine growth factor sqrt(1 + eta^2/(2/3 + eta^2)) > 1."""
    if eta <= 0:
        raise DomainError("eta must be > 0")
    return math.sqrt(1.0 + eta * eta / (2.0 / 3.0 + eta * eta))


def kappa_cosine_fine(theta: float, eta: float) -> float:
    """Per-angle cosine growth factor, >= kappa_cosine on [pi/3, pi/2)."""
    if eta <= 0:
        raise DomainError("eta must be > 0")
    if not 0.0 < theta < math.pi / 2:
        raise DomainError("theta must lie in (0, pi/2)")
    s, c = math.sin(theta), math.cos(theta)
    return math.sqrt(1.0 + s * s / (c * c + 0.5 * (1.0 + eta**-2)))


def kappa_sine(theta: float, eta: float) -> float:
    """Per-step sine contraction factor in (0, 1)."""
    if eta <= 0:
        raise DomainError("eta must be > 0")
    if not 0.0 <= theta < math.pi / 2:
        raise DomainError("theta must lie in [0, pi/2)")
    c = math.cos(theta)
    return 1.0 / math.sqrt(1.0 + (2.0 * eta * eta / (1.0 + eta * eta)) * c * c)


def kappa_distance(state: PlanarState) -> tuple[str, float, float]:
    """Distance-contraction case split for theta < pi/8.

    Returns (case, kappa, extra_term). Case "contract" bounds the next
    distance by kappa * dist + extra_term; case "flat" by 0.6 * dist.
    Outside theta < pi/8 returns ("not_applicable", nan, nan).
    """
    theta = state.theta
    if theta >= math.pi / 8:
        return "not_applicable", math.nan, math.nan
    sigma_sq = state.sigma**2
    b1_star = abs(state.b1_star)
    bs_norm = state.beta_star_norm
    eta = state.snr
    if state.b2_star < state.sigma or (state.sigma2_sq / sigma_sq) * state.b1 < b1_star:
        m = min(state.sigma2_sq * state.b1 / sigma_sq, b1_star)
        kappa = 1.0 / math.sqrt(1.0 + m * m / state.sigma2_sq)
        extra = kappa * 16.0 * math.sin(theta) ** 3 * bs_norm \
            * eta * eta / (1.0 + eta * eta)
        return "contract", kappa, extra
    return "flat", 0.6, 0.0


def kappa_corollary1(beta0_norm: float, truth: GroundTruth) -> float:
    """Multi-step envelope rate: max of the three candidate factors."""
    eta = truth.snr()
    return max(
        0.6,
        math.sqrt(1.0 / (1.0 + beta0_norm**2 / truth.sigma**2)),
        math.sqrt(1.0 - 0.8 * eta * eta / (1.0 + eta * eta)),
    )


def _theta(record) -> float:
    return math.atan2(record.sin_theta, record.cos_theta)


def _norm(record) -> float:
    return record.b1 if hasattr(record, "b1") else record.norm


def _planar_of(record, truth: GroundTruth) -> PlanarState:
    if hasattr(record, "b1_star"):
        return PlanarState(b1=record.b1, b1_star=record.b1_star,
                           b2_star=record.b2_star, sigma=truth.sigma)
    bs = truth.norm
    return PlanarState(b1=record.norm, b1_star=bs * record.cos_theta,
                       b2_star=bs * record.sin_theta, sigma=truth.sigma)


def check_trajectory(records: list, truth: GroundTruth, mode: str,
                     eps_f: float | None = None) -> list[BoundReport]:
    """Evaluate every applicable theorem bound along one recorded run."""
    if mode not in ("population", "finite"):
        raise DomainError("mode must be 'population' or 'finite'")
    if mode == "finite" and eps_f is None:
        raise DomainError("finite mode requires eps_f")
    if not records:
        return []

    eta = truth.snr()
    bs_norm = truth.norm
    sigma = truth.sigma
    ball = 3.0 * math.sqrt(sigma**2 + bs_norm**2)
    reports: list[BoundReport] = []

    def emit(theorem_id, it, applicable, lhs, rhs, margin, slack):
        passed = (not applicable) or margin >= -slack
        reports.append(BoundReport(theorem_id=theorem_id, iter=it,
                                   applicable=applicable, lhs=lhs, rhs=rhs,
                                   margin=margin, passed=passed))
        checks = getattr(records[min(it, len(records) - 1)], "bound_checks", None)
        if isinstance(checks, dict) and applicable:
            checks[theorem_id] = margin

    floor_applicable = _norm(records[0]) >= bs_norm / 10.0

    for t in range(len(records) - 1):
        cur, nxt = records[t], records[t + 1]
        theta = _theta(cur)
        variant = getattr(nxt, "variant_used", None)

        if mode == "population":
            # Cos-T2: cosine growth in the wide-angle phase
            applicable = math.pi / 3 <= theta < math.pi / 2 and cur.cos_theta > 0
            rhs = kappa_cosine(eta) * cur.cos_theta
            emit("Cos-T2", t + 1, applicable, nxt.cos_theta, rhs,
                 nxt.cos_theta - rhs, POP_SLACK)

            # Sin-T3: sine contraction everywhere below pi/2
            applicable = theta < math.pi / 2
            rhs = kappa_sine(theta, eta) * cur.sin_theta if applicable else math.nan
            emit("Sin-T3", t + 1, applicable, nxt.sin_theta, rhs,
                 rhs - nxt.sin_theta, POP_SLACK)

            # Dist-T4: per-step distance contraction near the truth
            case, kap, extra = kappa_distance(_planar_of(cur, truth))
            applicable = case != "not_applicable"
            if applicable:
                rhs = kap * cur.l2_error + extra
            else:
                rhs = math.nan
            emit("Dist-T4", t + 1, applicable, nxt.l2_error, rhs,
                 rhs - nxt.l2_error, POP_SLACK)

            # Bounded: update lands in the 3*sqrt(sigma^2+|beta*|^2) ball
            emit("Bounded", t + 1, True, _norm(nxt), ball,
                 ball - _norm(nxt), BOUNDED_SLACK)
        else:
            slack = 10.0 * eps_f
            dist_slack = 10.0 * eps_f * math.sqrt(sigma**2 + bs_norm**2)

            # per-step cosine growth with statistical slack
            applicable = 0.0 < theta < math.pi / 2 and variant in ("em", "easyem")
            if applicable:
                kap = kappa_cosine_fine(theta, eta)
                err = FINITE_C * eps_f / math.sqrt(truth.d)
                if variant == "em":
                    err = max(err, FINITE_C * eps_f * eps_f)
                rhs = kap * (1.0 - 10.0 * eps_f) * cur.cos_theta - err
            else:
                rhs = math.nan
            tid = "EasyEM-T8" if variant == "easyem" else "FiniteCos-T6"
            emit(tid, t + 1, applicable, nxt.cos_theta, rhs,
                 nxt.cos_theta - rhs, 0.0)

            # squared-sine contraction; needs eps_f small vs min(1, eta^2)
            applicable = (theta < math.pi / 2
                          and 10.0 * eps_f < min(1.0, eta * eta))
            if applicable:
                ks = kappa_sine(theta, eta)
                rhs = ks * ks * cur.sin_theta**2 + slack
            else:
                rhs = math.nan
            emit("FiniteSin", t + 1, applicable, nxt.sin_theta**2, rhs,
                 rhs - nxt.sin_theta**2, 0.0)

            # distance contraction near the truth, split by SNR regime
            case, kap, extra = kappa_distance(_planar_of(cur, truth))
            near = case != "not_applicable"
            if eta >= HIGH_SNR_ETA:
                applicable = near
                rhs = (0.95 + eps_f) * cur.l2_error + 10.0 * eps_f * sigma \
                    if applicable else math.nan
                emit("FiniteDist-highSNR", t + 1, applicable, nxt.l2_error,
                     rhs, rhs - nxt.l2_error, 0.0)
            else:
                applicable = near
                if applicable:
                    base = kap * cur.l2_error + extra if case == "contract" \
                        else 0.6 * cur.l2_error
                    rhs = base + dist_slack
                else:
                    rhs = math.nan
                emit("FiniteDist-lowSNR", t + 1, applicable, nxt.l2_error,
                     rhs, rhs - nxt.l2_error, 0.0)

            emit("Bounded", t + 1, True, _norm(nxt), ball + dist_slack,
                 ball + dist_slack - _norm(nxt), 0.0)

        # norm floor, both modes
        emit("NormFloor", t + 1, floor_applicable, _norm(nxt),
             bs_norm / 10.0, _norm(nxt) - bs_norm / 10.0, 0.0)

    if mode == "population":
        # Corollary 1: multi-step envelope from a near-truth start
        first, last = records[0], records[-1]
        T = len(records) - 1
        applicable = T >= 1 and _theta(first) < math.pi / 8
        if applicable:
            kap = kappa_corollary1(_norm(first), truth)
            rhs = kap**T * first.l2_error \
                + T * kap**T * bs_norm * eta * eta / (1.0 + eta * eta)
        else:
            rhs = math.nan
        emit("Corollary1", len(records) - 1, applicable, last.l2_error, rhs,
             rhs - last.l2_error, POP_SLACK)

    return reports

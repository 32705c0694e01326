"""EM and Easy-EM for two-component mixed linear regression.

Library layout:

- model: ground truth and seeded synthetic data
- geometry: planar reduction and angle/distance metrics
- population: exact infinite-sample EM operator via Gaussian quadrature
- finite: finite-sample EM / Easy-EM and the sample-splitting driver
- oracle: Monte-Carlo estimators used to cross-validate the quadrature
- diagnostics: theorem-bound checkers over recorded trajectories
- cli: command-line harness (runs, landscape scans, sweeps, bound checks)
"""

from .errors import DomainError, NumericalError
from .geometry import PlanarState, angle_metrics, lift, planar_frame, reduce, signed_error
from .finite import (
    EmConfig,
    TrajectoryRecord,
    easyem_step,
    em_step,
    norm_floor_check,
    run_sample_splitting,
)
from .model import Dataset, GroundTruth, random_init, sample_dataset
from .population import (
    PopulationRecord,
    PopulationStep,
    QuadratureSpec,
    apply_population_step,
    compute_S_R,
    default_quadrature,
    find_fixed_point_E,
    hessian_quadform_along_bstar,
    population_em_step,
    population_loglik,
    run_population_trajectory,
)

__all__ = [
    "DomainError",
    "NumericalError",
    "PlanarState",
    "angle_metrics",
    "lift",
    "planar_frame",
    "reduce",
    "signed_error",
    "EmConfig",
    "TrajectoryRecord",
    "easyem_step",
    "em_step",
    "norm_floor_check",
    "run_sample_splitting",
    "Dataset",
    "GroundTruth",
    "random_init",
    "sample_dataset",
    "PopulationRecord",
    "PopulationStep",
    "QuadratureSpec",
    "apply_population_step",
    "compute_S_R",
    "default_quadrature",
    "find_fixed_point_E",
    "hessian_quadform_along_bstar",
    "population_em_step",
    "population_loglik",
    "run_population_trajectory",
]

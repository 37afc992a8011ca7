"""Off-grid direction-of-arrival estimation with a multiobjective bilevel
evolutionary algorithm and correntropy-based sparse recovery."""

from .array import ArrayConfig, Grid, Scenario, manifold, steering_vector, synthesize
from .correntropy import KernelSchedule, clf, gaussian_kernel
from .estimator import MoBEA
from .exceptions import (
    ConfigurationError,
    DegenerateDataError,
    DomainError,
    EstimationFailedError,
    KneeUnavailableError,
    MobeaError,
    NotAdmissibleError,
    OvercompleteSupportError,
)
from .metrics import avg_source_number, compute_rmse, hungarian_assign
from .noise import gmm_from_snr, sample_gmm, sample_sas, sas_from_gsnr
from .solver import EstimationResult, SolverConfig, run

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "Grid",
    "Scenario",
    "manifold",
    "steering_vector",
    "synthesize",
    "KernelSchedule",
    "clf",
    "gaussian_kernel",
    "MoBEA",
    "MobeaError",
    "DomainError",
    "ConfigurationError",
    "DegenerateDataError",
    "OvercompleteSupportError",
    "NotAdmissibleError",
    "KneeUnavailableError",
    "EstimationFailedError",
    "hungarian_assign",
    "compute_rmse",
    "avg_source_number",
    "gmm_from_snr",
    "sas_from_gsnr",
    "sample_gmm",
    "sample_sas",
    "EstimationResult",
    "SolverConfig",
    "run",
]

"""Multivariate Hawkes processes: exact simulation, scaling limits and
cross-scale covariation of increments, with tick-price applications."""

from .asymptotics import (
    CovariationResult,
    CovariationTheory,
    ExpectedCounts,
    LimitSummary,
    covariation_theory,
    covariation_theory_sweep,
    expected_counts,
    limit_summary,
    resolvent,
)
from .config import load_model, model_from_config
from .errors import (
    ConfigError,
    DataCoverageError,
    ExplosionError,
    GridError,
    HawkesError,
    IntegrabilityError,
    ResolutionError,
    SpectralRadiusError,
    StabilityError,
    TruncationError,
)
from .estimator import CenteredPath, clt_samples, contrast, covariation_empirical, increments, lln_statistic
from .kernels import (
    ExpKernel,
    KernelMatrix,
    SampledMatrixFunction,
    TabulatedKernel,
    ZeroKernel,
    convolve,
    cross_series_F,
    exp_F,
    l1_matrix,
    psi_series,
    shifted_kernel,
    spectral_radius,
    stability_report,
)
from .model import EventStream, HawkesModel, read_events_csv, write_events_csv
from .price_models import (
    CrossCorrelogram,
    LeadLagModel,
    MicrostructureModel,
    c11,
    c12,
    critical_value,
    leadlag_asymmetry,
    macro_correlation,
    micro_sigma2,
)
from .simulator import SimConfig, derive_seed, intensity, simulate, simulate_batch

__version__ = "0.1.0"

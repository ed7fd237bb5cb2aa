"""Simulation, exact moments and inference for random warping functions."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AccuracyError,
    DegenerateEstimateError,
    DegenerateWarpError,
    DomainError,
    IngestionError,
    InsufficientSampleError,
    InvalidElementError,
    InvalidParameterError,
    SamplingError,
    UnsupportedParameterError,
    WarpError,
)
from .rng import RngStream, dirichlet_batch, sample_dirichlet, sample_uniform_order_stats  # noqa: E402
from .warps import (  # noqa: E402
    PHI1,
    PHI2,
    PHI3,
    Gamma1Warp,
    HFunction,
    WarpPath,
    gamma_inner,
    gamma_minus,
    gamma_plus,
    gamma_scale,
    get_target,
    psi,
    psi_inverse,
)
from .samplers import (  # noqa: E402
    BkConfig,
    CdfConfig,
    CdhConfig,
    MzwConfig,
    simulate_bk,
    simulate_cdf,
    simulate_cdh,
    simulate_mzw,
    simulate_mzw_original,
)
from .moments import (  # noqa: E402
    asymptotic_profile,
    bk_mean_exact,
    bk_var_exact,
    cdf_mean_exact,
    cdf_var_exact,
    exact_profile,
    l2_risk_limit,
)
from .montecarlo import StudySpec, run_study  # noqa: E402
from .analysis import bootstrap_bands, estimate_phi, estimate_theta, warp_from_quantiles  # noqa: E402

__all__ = [
    "__version__",
    "AccuracyError",
    "PHI1",
    "BkConfig",
    "asymptotic_profile",
    "DegenerateEstimateError",
    "DegenerateWarpError",
    "DomainError",
    "IngestionError",
    "InsufficientSampleError",
    "InvalidElementError",
    "InvalidParameterError",
    "SamplingError",
    "UnsupportedParameterError",
    "WarpError",
    "PHI2",
    "PHI3",
    "Gamma1Warp",
    "HFunction",
    "WarpPath",
    "gamma_inner",
    "gamma_minus",
    "gamma_plus",
    "gamma_scale",
    "get_target",
    "psi",
    "psi_inverse",
    "CdfConfig",
    "CdhConfig",
    "MzwConfig",
    "simulate_bk",
    "simulate_cdf",
    "simulate_cdh",
    "simulate_mzw",
    "simulate_mzw_original",
    "bk_mean_exact",
    "bk_var_exact",
    "cdf_mean_exact",
    "cdf_var_exact",
    "exact_profile",
    "l2_risk_limit",
    "RngStream",
    "dirichlet_batch",
    "sample_dirichlet",
    "sample_uniform_order_stats",
    "StudySpec",
    "run_study",
    "bootstrap_bands",
    "estimate_phi",
    "estimate_theta",
    "warp_from_quantiles",
]

"""Fractional Brownian motion: exact circulant sampling, Hurst estimation, kernel checks."""

__version__ = "0.1.0"

from .cov import (
    HurstParameter,
    fbm_covariance,
    fgn_autocovariance,
    increment_covariance,
    variogram,
)
from .filters import Filter, apply_filter, dilate, filtered_autocovariance, make_named_filter, validate_order
from .circulant import (
    CirculantEmbedding,
    FbmPath,
    FgnSeries,
    build_embedding,
    cholesky_sample_oracle,
    fgn_to_fbm,
    sample_fgn,
    simulate_fbm,
)
from .hurst import (
    EstimateResult,
    EstimatorConfig,
    empiric_variance,
    estimate_hurst,
    estimate_with_ci,
    normality_diagnostic,
    standard_estimator,
)

"""Synthesis of locally anisotropic fractional Brownian fields by turning bands."""

from ._backend import NAME as BACKEND
from .bands import Band, BandPlan, InfeasiblePlanError, enumerate_candidates, plan_for, select_bands
from .fbm_line import (
    EmbeddingError,
    FbmLine,
    HurstIndex,
    RandomStream,
    fbm_covariance,
    fgn_autocovariance,
    generate_fbm_line,
)
from .orientation import AngularWeightParams, OrientationField, angular_weight, eval_alpha0
from .synthesis import (
    FieldGrid,
    PreparedState,
    SynthesisParams,
    band_sample,
    gamma_factor,
    precompute,
    synthesize_elementary,
    synthesize_lafbf,
    synthesize_points,
)
from .validation import (
    VariogramEstimate,
    discrete_variogram,
    empirical_variogram,
    estimate_hurst,
    local_variogram_lafbf,
    theoretical_variogram,
)

__version__ = "0.1.0"

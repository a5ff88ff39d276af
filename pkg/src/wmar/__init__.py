"""Wasserstein multivariate autoregression for distributional time series on [0, 1]."""
from .estimate import (
    FitOptions,
    FitReport,
    GramPair,
    GramSingularError,
    center_series,
    fit,
    fit_row,
    forecast,
    gram,
    lse_unconstrained,
    project_simplex,
    rmsd,
)
from .qfun import (
    Grid,
    GridMismatchError,
    LogImageError,
    QuantileGrid,
    SplineSpec,
    compose,
    empirical_quantile,
    exp_leb,
    frechet_mean,
    inner_leb,
    left_inverse,
    log_leb,
    ominus,
    oplus,
    spline_monotone,
    wasserstein,
)
from .series import DistSeries
from .simulate import (
    DistortionSpec,
    SimConfig,
    gen_coeffs,
    gen_distortion,
    generate,
    sample_xi,
    simulate_centered,
    spectral_norm,
    step,
    synthesize_raw,
)

__version__ = "0.1.0"

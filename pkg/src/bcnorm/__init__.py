"""Box-Cox normalisation of positive data with kurtosis-driven exponent choice."""

__version__ = "0.1.0"

from .boxcox import (
    BoxCoxParams,
    LambdaSearchConfig,
    Objective,
    OptimalLambda,
    inverse_transform,
    kurtosis_curve,
    optimize_lambda,
    transform_one,
    transform_series,
)
from .model_fit import (
    GaussianFit,
    Histogram,
    build_histogram,
    fit_gaussian_least_squares,
    fit_gaussian_moments,
)
from .stats_core import (
    MomentSummary,
    Series,
    kurtosis,
    mean,
    moment_summary,
    pearson,
    skewness,
    variance,
)
from .synth import BivariateSpec, LogNormalSpec, generate_bivariate_lognormal, generate_lognormal

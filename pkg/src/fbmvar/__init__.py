"""Weighted odd-power variations of fractional Brownian motion.

A simulation library for subdiffusive (H < 1/2) fBm and fBm-in-Brownian-
time, the odd-power variation statistics built on them, the exact
constants entering their limit laws, and a Monte Carlo harness that turns
each limit theorem into a desk-scale pass/fail check.
"""

from .brownian_time import (
    CrossingCounts,
    EmbeddedWalk,
    FbmbtSample,
    crossing_counts,
    crossing_power_variation,
    identity_residuals,
    sample_fbmbt,
    sample_walk,
    spatial_midpoint_power_variation,
    spatial_power_variation,
    terminal_site,
    walk_power_variation,
)
from .fbm import (
    CholeskyError,
    FbmPath,
    GridSpec,
    SeedSpec,
    SpectralError,
    make_path,
    sample_fbm,
    sample_fbm_cholesky,
    sample_fgn_circulant,
)
from .gaussian import (
    ConvergenceError,
    HermiteCoeffs,
    HurstParam,
    LimitSigma,
    as_hurst,
    bivariate_odd_moment,
    coarse_increment_overlap,
    double_factorial,
    fbm_covariance,
    fgn_correlation,
    gaussian_moment,
    hermite_coeffs,
    hermite_eval,
    limit_sigma,
    midpoint_increment_overlap,
    midpoint_increment_overlap_closed,
)
from .harness import (
    ExperimentConfig,
    McReport,
    ks_one_sample,
    ks_two_sample,
    l2_endpoint_test,
    mixture_law_test,
    moment_scaling_test,
    run_experiment,
)
from .acceptance import ACCEPTANCE, DEFAULT_MASTER_SEEDS, run_check
from .variations import (
    VariationSeries,
    coarse_weight_variation,
    endpoint_variation,
    limit_conditional_std,
    limit_quadrature,
    midpoint_variation,
    simulate_limit,
    taylor_remainder_split,
    trapezoidal_variation,
    unweighted_variation,
)
from .version import VERSION as __version__
from .weights import REGISTRY as WEIGHTS
from .weights import WeightFunction, check_derivatives, get_weight

__all__ = [name for name in dir() if not name.startswith("_")]

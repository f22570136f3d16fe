"""FFT-accelerated permutation-test p-values."""

from .adapters import (
    DegenerateInputError,
    GroupedSample,
    TestReduction,
    TieWarning,
    kruskal_wallis_pvalue,
    mann_whitney_reduction,
    pearson_reduction,
    spearman_reduction,
)
from .covariance import empirical_covariance_probe
from .estimators import (
    AccuracySpec,
    PValueEstimate,
    conservative_pvalue,
    estimate_pvalue,
    estimate_pvalue_median,
    exact_pvalue,
    naive_mc_pvalue,
)
from .perm import Permutation, RngStream, apply, conjugate, cyclic_shift_pow, midranks, uniform_permutation
from .sampler import batch_indicator_mean, circulant_dots

__version__ = "0.1.0"

"""Familywise error rates of the Bonferroni procedure under correlated Gaussians."""

__version__ = "0.1.0"

from .cutoffs import (
    Cutoff,
    EquicorrProblem,
    bonferroni_cutoff,
    cutoff_ratio_diagnostic,
    kfwer_cutoff,
    lemma1_threshold,
    sqrt_2logn_bound,
)
from .equicorr import (
    FwerValue,
    Method,
    QuadratureSpec,
    convexity_probe,
    fwer_asymptotic_approx,
    fwer_equicorr,
    fwer_independent,
    fwer_perfectly_correlated,
    fwer_quadrature,
    limit_diagnostic_lemma2,
)
from .errors import ConvergenceError, DomainError, MatrixValidationError, SamplerRefusal
from .general import (
    CorrelationMatrix,
    estimate_fwer_general,
    estimate_kfwer_general,
    quadrant_probability_mc,
    slepian_upper_bound,
    validate_correlation,
)
from .montecarlo import (
    EstimateResult,
    McConfig,
    Sampler,
    estimate_fwer,
    estimate_kfwer,
    table_one_run,
)

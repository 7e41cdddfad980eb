"""Empirical Bayes and confidence inference for one or a few comparisons.

The main entry points are :func:`fit_mixture` (constrained maximum likelihood
for the two-group mixture), :func:`lfdr`, :func:`confidence_posterior`, the
two simulation studies and the :func:`analyze` pipeline.
"""

__version__ = "0.1.0"

from .confidence import (
    PosteriorKind,
    PosteriorSummary,
    confidence_cdf,
    confidence_posterior,
    confidence_quantile,
    equal_tail_interval,
    improper_bayes_posterior,
    observed_confidence_null,
    signed_confidence_cdf,
)
from .errors import DataError, DegenerateInputError, DomainError, SmallFDRError, UnsupportedModelError
from .fit import DELTA_FLOOR, FitResult, Pi0Bounds, fit_mixture, log_likelihood
from .mixture import MixtureModel, eb_posterior, eq1_posterior, lfdr, marginal_density, marginal_logdensity
from .pipeline import AbundanceTable, AnalysisReport, analyze, preprocess, read_table, synthetic_table, t_statistics
from .simulate import (
    MethodKind,
    MethodSpec,
    SimulationConfig,
    SimulationReport,
    run_coverage_study,
    run_rmse_study,
)
from .special_functions import (
    INFINITE,
    folded_logpdf,
    folded_pdf,
    folded_sf,
    noncentral_t_cdf,
    noncentral_t_pdf,
    normal_cdf,
    normal_pdf,
    normal_quantile,
)

"""Reference models implementing the check engine's sampling contract."""

from .dp import DPPredictive, DPModel, dp_predictive_sample, dp_predictive_logdensity
from .blr import (
    BLRPosterior,
    BLRModel,
    blr_posterior,
    blr_predictive_sample,
    simulate_regression_data,
)
from .lda import (
    LDAState,
    LDAFixedTopicModel,
    generate_corpus,
    lda_gibbs_fit,
    lda_local_posterior,
    lda_generate,
    local_posterior_draws,
    sample_assignments,
)

__all__ = [
    "DPPredictive",
    "DPModel",
    "dp_predictive_sample",
    "dp_predictive_logdensity",
    "BLRPosterior",
    "BLRModel",
    "blr_posterior",
    "blr_predictive_sample",
    "simulate_regression_data",
    "LDAState",
    "LDAFixedTopicModel",
    "generate_corpus",
    "lda_gibbs_fit",
    "lda_local_posterior",
    "lda_generate",
    "local_posterior_draws",
    "sample_assignments",
]

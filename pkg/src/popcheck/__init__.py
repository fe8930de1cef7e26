"""Population predictive checks for Bayesian models.

Compare a model's posterior predictive distribution against the population
distribution of the data instead of against the observed data themselves,
estimating the population by cross-validation, out-of-bag bootstrap, double
bootstrap, or p-bootstrap resampling when fresh draws are unavailable.
"""

from .data import Dataset, LatentState
from .engine import (
    CheckConfig,
    CheckError,
    CheckResult,
    Discrepancy,
    DistanceFn,
    GroupedModel,
    Model,
    absolute,
    evaluate_distance,
    indicator,
    run_popc_estimated,
    run_popc_ideal,
    run_ppc,
    run_prior_pc,
    summarize,
    vector_deviance,
)
from .resampling import (
    EmpiricalDistribution,
    EmptySplitError,
    SplitScheme,
    cv_split,
    double_bootstrap_split,
    oob_split,
    p_bootstrap_split,
)
from .discrepancy import (
    IMIMatrix,
    chi_squared_d,
    imi_d,
    log_predictive_d,
    mean_d,
    mse_d,
)
from .hierarchy import GroupSplit, omnibus_check, per_group_check, within_group_split
from .rng import derive_seed, substream

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "LatentState",
    "CheckConfig",
    "CheckError",
    "CheckResult",
    "Discrepancy",
    "DistanceFn",
    "Model",
    "GroupedModel",
    "absolute",
    "indicator",
    "vector_deviance",
    "evaluate_distance",
    "run_ppc",
    "run_prior_pc",
    "run_popc_ideal",
    "run_popc_estimated",
    "summarize",
    "EmpiricalDistribution",
    "EmptySplitError",
    "SplitScheme",
    "cv_split",
    "oob_split",
    "double_bootstrap_split",
    "p_bootstrap_split",
    "IMIMatrix",
    "mean_d",
    "log_predictive_d",
    "chi_squared_d",
    "mse_d",
    "imi_d",
    "GroupSplit",
    "within_group_split",
    "per_group_check",
    "omnibus_check",
    "substream",
    "derive_seed",
    "__version__",
]

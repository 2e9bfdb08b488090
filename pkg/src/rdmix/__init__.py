"""Bayesian nonparametric mixture regression for regression discontinuity
designs: posterior predictive functionals (mean, variance, density, cdf,
quantile) and sharp/fuzzy causal-effect estimates with uncertainty.
"""

from .causal import (
    CausalEffectEstimate,
    adherence_denominator,
    adherence_sensitivity,
    fuzzy_effect_first_order,
    fuzzy_effect_posterior_ratio,
    fuzzy_effect_second_order,
    quantile_effect,
    sharp_effect,
)
from .chainio import chain_to_csv, load_chain, save_chain
from .datasim import GroundTruth, SimSpec, simulate
from .diagnostics import (
    ConvergenceReport,
    FitReport,
    batch_means_ci,
    convergence_report,
    r_squared,
    residuals,
    traces,
)
from .errors import (
    ChainNumericalError,
    InsufficientDrawsError,
    RdmixError,
    ShortSeriesError,
    TruncationUnderflowError,
    ZeroDenominatorError,
)
from .model import (
    ComponentWindow,
    Dataset,
    Hyperparams,
    OutcomeFunctional,
    ParameterState,
    active_component_window,
    component_weights,
    functional_eval,
    location_link,
    mixture_cdf,
    mixture_density,
    mixture_mean,
    mixture_quantile,
    mixture_variance,
    scale_link,
    window_mass,
)
from .predictive import (
    PredictiveQuery,
    PredictiveSummary,
    cdf_credible_band,
    pp_plot_data,
    predict,
    predictive_moments,
    predictive_quantile,
)
from .sampler import (
    McmcConfig,
    PosteriorDraws,
    binary_sweep,
    gibbs_sweep,
    initial_state,
    run_chain,
    run_chains,
)

__version__ = "0.1.0"

__all__ = [
    "CausalEffectEstimate",
    "ChainNumericalError",
    "ComponentWindow",
    "ConvergenceReport",
    "Dataset",
    "FitReport",
    "GroundTruth",
    "Hyperparams",
    "InsufficientDrawsError",
    "McmcConfig",
    "OutcomeFunctional",
    "ParameterState",
    "PosteriorDraws",
    "PredictiveQuery",
    "PredictiveSummary",
    "RdmixError",
    "ShortSeriesError",
    "SimSpec",
    "TruncationUnderflowError",
    "ZeroDenominatorError",
    "active_component_window",
    "adherence_denominator",
    "adherence_sensitivity",
    "batch_means_ci",
    "binary_sweep",
    "cdf_credible_band",
    "chain_to_csv",
    "component_weights",
    "convergence_report",
    "functional_eval",
    "fuzzy_effect_first_order",
    "fuzzy_effect_posterior_ratio",
    "fuzzy_effect_second_order",
    "gibbs_sweep",
    "initial_state",
    "load_chain",
    "location_link",
    "mixture_cdf",
    "mixture_density",
    "mixture_mean",
    "mixture_quantile",
    "mixture_variance",
    "pp_plot_data",
    "predict",
    "predictive_moments",
    "predictive_quantile",
    "quantile_effect",
    "r_squared",
    "residuals",
    "run_chain",
    "run_chains",
    "save_chain",
    "scale_link",
    "sharp_effect",
    "simulate",
    "traces",
    "window_mass",
]

"""How many extra bidders simple auctions need to match optimal ones when
additive bidders buy several items: priors, order statistics, revenue
estimates and the bundle quantile game."""

from .competition import CompetitionResult, competition_constant, competition_constant_bounds
from .distributions import (
    EqualRevenue,
    Exponential,
    GeneralizedPareto,
    Marginal,
    ProductPrior,
    ShiftedExponential,
    TwoPoint,
    Uniform,
    gamma_alpha,
    is_regular,
    make_marginal,
    monopoly,
    strong_regularity_coefficient,
    virtual_value,
)
from .mechanisms import (
    bundling_gap_experiment,
    eval_brev,
    eval_cdw,
    eval_core,
    eval_simple,
    eval_srev,
    two_part_tariff,
)
from .order_stats import expected_order_stat, order_stat_density, three_interval_crossings
from .quantile_game import case_probabilities, cdw_of_matrix, dominance_report, game_value, mixture_weights_m3
from .sampling import Estimate, SampleConfig, monte_carlo

__version__ = "0.1.0"

__all__ = [
    "CompetitionResult",
    "competition_constant",
    "competition_constant_bounds",
    "EqualRevenue",
    "Exponential",
    "GeneralizedPareto",
    "Marginal",
    "ProductPrior",
    "ShiftedExponential",
    "TwoPoint",
    "Uniform",
    "gamma_alpha",
    "is_regular",
    "make_marginal",
    "monopoly",
    "strong_regularity_coefficient",
    "virtual_value",
    "bundling_gap_experiment",
    "eval_brev",
    "eval_cdw",
    "eval_core",
    "eval_simple",
    "eval_srev",
    "two_part_tariff",
    "expected_order_stat",
    "order_stat_density",
    "three_interval_crossings",
    "case_probabilities",
    "cdw_of_matrix",
    "dominance_report",
    "game_value",
    "mixture_weights_m3",
    "Estimate",
    "SampleConfig",
    "monte_carlo",
]

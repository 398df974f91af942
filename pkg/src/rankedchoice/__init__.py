"""Column-generation estimation of ranked-list discrete choice models."""

from .model import (
    PASSIVE,
    ChoiceModel,
    ConsumerType,
    DistinctMarket,
    Transaction,
    TransactionLog,
    bundle_distribution,
    empirical_probabilities,
    estimate_arrival_rate,
    is_compatible,
    predicted_probability,
    purchase_outcome,
)
from .pricing import (
    Label,
    PricingInstance,
    PricingResult,
    completion_bound,
    completion_bound_prune,
    dominates,
    extend,
    init_labels,
    profit_of_type,
    solve_pricing,
    solve_pricing_heuristic,
    unreachable_update,
)
from .oracle import OracleConfig, brute_force_glop
from .driver import CgConfig, CgReport, run_estimation
from .datagen import GenSpec, GenResult, generate
from .metrics import bundle_space_size, hrmse, mrmse, srmse
from .assortment import (
    ProbitPopulation,
    build_probit_population,
    expected_revenue,
    optimize_assortment,
    population_from_choice_model,
    simulate_revenue,
)

__version__ = "0.1.0"

"""
Optimization pipelines, comparison schemes and experiment orchestration
"""

from .baselines import (
    element_partition,
    evaluate_scheme,
    optimize_fixed_coefficients,
    quantize_coefficients,
    random_coefficients,
    transmission_rate_no_eve,
)
from .experiment_service import aggregate, resolve_workers, run_experiment, solve_one
from .full_csi import (
    FullCsiOutcome,
    SecrecyRatioRestriction,
    ahb_solve,
    build_secrecy_program,
    dinkelbach_mu,
    optimal_power_full,
    two_layer_solve,
)
from .statistical_csi import (
    MonteCarloEstimate,
    OutageRestriction,
    SopParams,
    StatCsiOutcome,
    build_outage_program,
    extended_ahb,
    optimal_power_stat,
    sop_closed_form,
    sop_monte_carlo,
    sop_params,
    two_layer_outage,
)

__all__ = [
    "element_partition",
    "evaluate_scheme",
    "optimize_fixed_coefficients",
    "quantize_coefficients",
    "random_coefficients",
    "transmission_rate_no_eve",
    "aggregate",
    "resolve_workers",
    "run_experiment",
    "solve_one",
    "FullCsiOutcome",
    "SecrecyRatioRestriction",
    "ahb_solve",
    "build_secrecy_program",
    "dinkelbach_mu",
    "optimal_power_full",
    "two_layer_solve",
    "MonteCarloEstimate",
    "OutageRestriction",
    "SopParams",
    "StatCsiOutcome",
    "build_outage_program",
    "extended_ahb",
    "optimal_power_stat",
    "sop_closed_form",
    "sop_monte_carlo",
    "sop_params",
    "two_layer_outage",
]

"""Simulated designs, comparators and the power-study harness."""

from .comparators import (
    PERMUTATION_METHODS,
    DidModel,
    PermutationResult,
    did_fit,
    full_sample_residuals,
    permutation_test,
    pre_period_counterfactual,
    sc_statistic,
)
from .noise import NoiseSpec, gen_noise
from .power import METHODS, PowerCurve, cell_seed, default_pool, power_study
from .simulate import (
    DGP_IDS,
    DgpSpec,
    SimResult,
    beta_vector,
    carryover_bias,
    naive_mean_gap,
    simulate,
    simulate_carryover,
)

__all__ = [
    "PERMUTATION_METHODS", "DidModel", "PermutationResult", "did_fit", "full_sample_residuals",
    "permutation_test", "pre_period_counterfactual", "sc_statistic", "NoiseSpec", "gen_noise",
    "METHODS", "PowerCurve", "cell_seed", "default_pool", "power_study", "DGP_IDS", "DgpSpec",
    "SimResult", "beta_vector", "carryover_bias", "naive_mean_gap", "simulate",
    "simulate_carryover",
]

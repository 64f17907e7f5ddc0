"""Generalized Markov chain choice models.

Assortments are lists of 1-based product ids; index 0 of every probability
vector is the no-purchase option.
"""

from ._core import (
    GmchoiceError,
    GmnlModel,
    InvalidInput,
    LowRankModel,
    MarkovChainModel,
    NumericalFailure,
    ResourceGuard,
    brute_force_gmnl,
    choice_probabilities,
    estimate_gmnl,
    estimate_mnl,
    expected_revenue,
    fptas_gmnl,
    fptas_lowrank,
    generate_dataset,
    gmnl_choice_probabilities,
    gmnl_revenue,
    log_likelihood,
    lowrank_revenue,
    no_purchase_curve,
    roc_auc,
    simulate_frequencies,
    synthetic_beta,
    synthetic_features,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

"""Occurrence statistics of random k-bit words in Bernoulli(p) bit sequences.

Thin package over the compiled extension: exact disjoint-block match laws,
entropy-driven window budgets, counter-based sampling, window counting, and
Poisson-distance certificates.
"""

from bitwords._core import (
    BitSequence,
    CountDistribution,
    CountTable,
    GuardError,
    OverlapTerm,
    ResolvedRegime,
    TvBoundReport,
    ValidationError,
    Word,
    annealed_distribution,
    annealed_mean,
    annealed_pmf_at,
    binary_entropy,
    fixed_weight_count,
    fixed_weight_mass,
    gaussian_cdf,
    gaussian_cdf_scaled,
    indicator_product_mean_bruteforce,
    indicator_product_mean_bruteforce_all,
    limit_atom,
    log_odds_exponent,
    match_prob,
    philox_block,
    poisson_distribution,
    poisson_pmf,
    quenched_distribution_all_words,
    quenched_distribution_fixed_weight,
    resolve_regime,
    resolve_regime_log2,
    run_report,
    sample_fixed_weight_word,
    sample_sequence,
    sample_word,
    stein_chen_bound,
    stream_raw,
    stream_uniform53,
    tv_distance,
    weight_floor,
    word_log_prob,
)

__all__ = [
    "BitSequence",
    "CountDistribution",
    "CountTable",
    "GuardError",
    "OverlapTerm",
    "ResolvedRegime",
    "TvBoundReport",
    "ValidationError",
    "Word",
    "annealed_distribution",
    "annealed_mean",
    "annealed_pmf_at",
    "binary_entropy",
    "fixed_weight_count",
    "fixed_weight_mass",
    "gaussian_cdf",
    "gaussian_cdf_scaled",
    "indicator_product_mean_bruteforce",
    "indicator_product_mean_bruteforce_all",
    "limit_atom",
    "log_odds_exponent",
    "match_prob",
    "philox_block",
    "poisson_distribution",
    "poisson_pmf",
    "quenched_distribution_all_words",
    "quenched_distribution_fixed_weight",
    "resolve_regime",
    "resolve_regime_log2",
    "run_report",
    "sample_fixed_weight_word",
    "sample_sequence",
    "sample_word",
    "stein_chen_bound",
    "stream_raw",
    "stream_uniform53",
    "tv_distance",
    "weight_floor",
    "word_log_prob",
]

__version__ = "0.1.0"

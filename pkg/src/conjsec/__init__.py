"""Conjugacy-based key exchange over free, symmetric and braid groups, with
attacks and an average-case benchmark harness."""

from .attacks import (
    AttackOutcome,
    ConjugacyInstance,
    SolverConfig,
    attack_transcript,
    brute_force_search,
    composite_run,
    length_based_attack,
    verify_witness,
)
from .bench import (
    BenchReport,
    SamplerConfig,
    expected_time,
    fit_polynomial,
    genericity_estimate,
    monte_carlo_check,
    multi_round_success,
    run_experiment,
    sample_instance,
)
from .platform import PlatformDescriptor, Permutation, equal, normal_form, word_length
from .protocols import AAGConfig, KoLeeConfig, Transcript, make_config, multi_round, run_exchange
from .words import Word, conjugate, cyclic_reduce, format_word, free_reduce, invert, parse_word

__version__ = "0.1.0"

__all__ = [
    "AAGConfig", "AttackOutcome", "BenchReport", "ConjugacyInstance", "KoLeeConfig",
    "Permutation", "PlatformDescriptor", "SamplerConfig", "SolverConfig", "Transcript", "Word",
    "attack_transcript", "brute_force_search", "composite_run", "conjugate", "cyclic_reduce",
    "equal", "expected_time", "fit_polynomial", "format_word", "free_reduce",
    "genericity_estimate", "invert", "length_based_attack", "make_config", "monte_carlo_check",
    "multi_round", "multi_round_success", "normal_form", "parse_word", "run_exchange",
    "run_experiment", "sample_instance", "verify_witness", "word_length",
]

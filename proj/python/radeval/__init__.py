"""Deterministic evaluation engine for radiology report generation."""

from ._core import (  # noqa: F401
    ConfigError,
    DuplicateError,
    Error,
    ParseError,
    SchemaError,
    UndefinedError,
    average_precision,
    bertscore,
    bleu,
    block_bootstrap_ci,
    blocked_tau,
    bootstrap_diff_ci,
    classify,
    format_percent,
    kendall_tau_b,
    ndcg_at_k,
    permutation_test,
    precision_at_k,
    report_cosine,
    rouge_l,
    run,
    tokenize,
    validate,
)

__version__ = "0.1.0"

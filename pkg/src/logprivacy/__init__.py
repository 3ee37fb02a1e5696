"""Anonymize process event logs to k-anonymity and t-closeness.

Violating traces are merged into the closest remaining variant, where
closeness is Levenshtein distance or a directed distance over learned
activity embeddings. Utility metrics compare the result with the original.
"""
from logprivacy.distance import (
    DistanceMeasure,
    Penalties,
    embedding_trace_distance,
    levenshtein,
    nearest_trace,
)
from logprivacy.embedding import EmbeddingModel, TrainConfig, cosine, event_distance, train_act2vec
from logprivacy.eventlog import (
    CsvColumns,
    Event,
    EventLog,
    LogError,
    Trace,
    Variant,
    event_durations,
    log_stats,
    parse_csv,
    parse_xes,
    read_log,
    variants,
    write_csv,
    write_log,
    write_xes,
)
from logprivacy.harness import SweepConfig, SweepRow, run_sweep
from logprivacy.kernels import BACKEND
from logprivacy.metrics import (
    behavioural_appropriateness,
    event_distance_stats,
    top_x_follower_share,
    total_duration_error,
    truly_sampled_score,
)
from logprivacy.pretsa import (
    AnonymizationReport,
    PrivacyParams,
    anonymize,
    build_prefix_tree,
    emd_normalized,
    violates,
)

__version__ = "0.1.0"

__all__ = [
    "AnonymizationReport",
    "anonymize",
    "BACKEND",
    "behavioural_appropriateness",
    "build_prefix_tree",
    "cosine",
    "CsvColumns",
    "DistanceMeasure",
    "embedding_trace_distance",
    "EmbeddingModel",
    "emd_normalized",
    "Event",
    "event_distance",
    "event_distance_stats",
    "event_durations",
    "EventLog",
    "levenshtein",
    "log_stats",
    "LogError",
    "nearest_trace",
    "parse_csv",
    "parse_xes",
    "Penalties",
    "PrivacyParams",
    "read_log",
    "run_sweep",
    "SweepConfig",
    "SweepRow",
    "top_x_follower_share",
    "total_duration_error",
    "Trace",
    "train_act2vec",
    "TrainConfig",
    "truly_sampled_score",
    "Variant",
    "variants",
    "violates",
    "write_csv",
    "write_log",
    "write_xes",
]

"""Filtered exhaustive embedding retrieval."""

from ._linr import (
    ChangeLog,
    Index,
    IndexConfig,
    LinrError,
    compression_report,
    encode,
    est_cosine,
    gen_synthetic,
    matched_bits,
    quantize_eval,
    run_benchmark,
)

__all__ = [
    "ChangeLog",
    "Index",
    "IndexConfig",
    "LinrError",
    "compression_report",
    "encode",
    "est_cosine",
    "gen_synthetic",
    "matched_bits",
    "quantize_eval",
    "run_benchmark",
]

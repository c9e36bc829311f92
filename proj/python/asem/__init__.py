# SPDX-License-Identifier: Apache-2.0
"""Cross-modal metric learning for audio-text retrieval."""

from ._core import (
    OBJECTIVES,
    compare,
    cosine_similarity,
    evaluate,
    format_mean_std,
    generate_synthetic,
    l2_normalize_rows,
    load_dataset,
    loss,
    mean_std,
    recall,
    train,
    write_synthetic,
)

__all__ = [
    "OBJECTIVES",
    "compare",
    "cosine_similarity",
    "evaluate",
    "format_mean_std",
    "generate_synthetic",
    "l2_normalize_rows",
    "load_dataset",
    "loss",
    "mean_std",
    "recall",
    "train",
    "write_synthetic",
]

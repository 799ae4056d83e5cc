"""Novelty detection for discrete event sequences.

Detectors (HMM, kNN, LOF, k-medoids, t-STIDE), a Markov-chain data
generator, average-precision evaluation and a scalability harness.
"""

import numba as _numba

# the bundled TBB is too old for numba; prefer OpenMP, fall back to workqueue
_numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from .seqcore import (  # noqa: E402
    ANOMALY,
    NOMINAL,
    UNSEEN,
    DatasetFormatError,
    LabeledDataset,
    SymbolTable,
    load_dataset,
    split_train_test,
    stratified_kfold,
    write_dataset,
)
from .distance import (  # noqa: E402
    DistanceMatrix,
    MetricKind,
    cross_matrix,
    lcs_length,
    levenshtein,
    normalized_distance,
    pairwise_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ANOMALY", "NOMINAL", "UNSEEN", "DatasetFormatError", "LabeledDataset", "SymbolTable",
    "load_dataset", "split_train_test", "stratified_kfold", "write_dataset",
    "DistanceMatrix", "MetricKind", "cross_matrix", "lcs_length", "levenshtein",
    "normalized_distance", "pairwise_matrix",
]

"""
Cross-validated MAP and the Friedman test
=========================================

Five-fold stratified cross-validation on a few generated datasets, then a
Friedman rank test across datasets and a best-vs-each comparison.
"""

import numpy as np

from seqnovelty.datagen import GeneratorSpec, generate_datasets
from seqnovelty.detectors import parse_detectors
from seqnovelty.evaluation import (cross_validated_map, format_friedman, friedman_test,
                                   pairwise_vs_best, rank_summary)

detectors = parse_detectors("hmm,knn-lev,kmedoids-lcs,t-stide")
reports = []
for seed in range(4):
    ds, _ = generate_datasets(GeneratorSpec(sigma=8, n_sequences=120, seq_len=25, seed=seed))
    for det in detectors:
        rep = cross_validated_map(det, ds, folds=5, seed=0, dataset_id=f"gen{seed}")
        print(f"{rep.dataset} {rep.detector:<13} MAP = {rep.map:.3f} +/- {rep.std:.3f}")
        reports.append(rep)

names = [d.name for d in detectors]
X = np.array([[r.map for r in reports if r.dataset == f"gen{s}"] for s in range(4)])
print(format_friedman(friedman_test(X), names, pairwise=pairwise_vs_best(X)))

# mean rank per algorithm, best first
for name, rank in rank_summary(reports):
    print(f"{name:<13} {rank:.2f}")

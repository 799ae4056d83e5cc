"""Detection quality: precision/recall, average precision, cross-validated
MAP, Friedman rank tests and rank summaries.

Anomalies are the positive class unless stated otherwise; scores are
"higher = more anomalous". Items sharing a score enter the predicted-positive
set together, which makes every metric independent of input order.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy import stats

from .seqcore import ANOMALY, NOMINAL, LabeledDataset, stratified_kfold


class EvaluationError(ValueError):
    pass


def _prepare(scores, labels, positive=ANOMALY):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise EvaluationError("scores and labels must be parallel 1-d arrays")
    if np.isnan(scores).any():
        raise EvaluationError("scores contain NaN")
    if positive == NOMINAL:
        scores = -scores
    y = (labels == positive).astype(np.int64)
    if y.sum() == 0:
        raise EvaluationError("no positive samples; precision/recall undefined")
    return scores, y


def precision_recall_curve(scores, labels, positive=ANOMALY):
    """Precision and recall at every distinct score, from high to low.

    Returns ``(thresholds, precision, recall)``. Point ``k`` counts every item
    with ``score >= thresholds[k]`` as predicted positive.
    """
    s, y = _prepare(scores, labels, positive)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[last]
    pp = np.flatnonzero(last) + 1
    return s[last], tp / pp, tp / y.sum()


def average_precision(scores, labels, positive=ANOMALY) -> float:
    """Step-wise area under the precision/recall curve, no interpolation."""
    _, precision, recall = precision_recall_curve(scores, labels, positive)
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


# -- cross-validation -----------------------------------------------------------

@dataclass
class EvalReport:
    detector: str
    dataset: str
    fold_ap: list = field(default_factory=list)

    @property
    def map(self) -> float:
        return float(np.mean(self.fold_ap))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_ap))


def _detector_name(detector):
    return getattr(detector, "name", type(detector).__name__)


def evaluate_split(detector, train: LabeledDataset, test: LabeledDataset) -> float:
    """Fit on ``train`` (anomalies included) and return the AP on ``test``."""
    model = detector.fit(train.sequences)
    return average_precision(model.score(test.sequences), test.labels)


def cross_validated_map(detector, ds: LabeledDataset, folds: int = 5, seed: int = 0,
                        dataset_id: str | None = None) -> EvalReport:
    """Stratified k-fold AP of ``detector`` on ``ds``.

    ``detector`` is anything with ``fit(sequences)`` returning a model with
    ``score(sequences)``. Training folds keep their anomalies, so the fitted
    model sees the same contamination as the test fold.
    """
    if dataset_id is None:
        dataset_id = str(ds.meta.get("name", ds.meta.get("source", "dataset")))
    report = EvalReport(_detector_name(detector), dataset_id)
    for f, (train, test) in enumerate(stratified_kfold(ds, folds, seed)):
        try:
            report.fold_ap.append(evaluate_split(detector, train, test))
        except Exception as exc:
            raise EvaluationError(f"{report.detector} failed on fold {f}: {exc}") from exc
    return report


# -- Friedman -------------------------------------------------------------------

@dataclass
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: np.ndarray
    p_chi2: float
    method: str


def _check_matrix(ap_matrix):
    X = np.asarray(ap_matrix, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 2:
        raise ValueError("Friedman test needs at least 2 datasets and 2 algorithms")
    return X


def _ranks(X):
    # rank 1 = highest value, ties share their average rank
    return np.vstack([stats.rankdata(-row, method="average") for row in X])


def _statistic(rank_sums, D, A):
    mean = np.asarray(rank_sums, dtype=np.float64) / D
    return 12.0 * D / (A * (A + 1)) * float(np.sum((mean - (A + 1) / 2.0) ** 2))


def _exact_p(ranks, observed):
    """Null distribution of the statistic under within-row permutations."""
    D, A = ranks.shape
    twice = np.rint(2 * ranks).astype(np.int64)
    dist = {(0,) * A: 1.0}
    for row in twice:
        perms = set(permutations(row.tolist()))
        w = 1.0 / len(perms)
        nxt = defaultdict(float)
        for state, p in dist.items():
            for perm in perms:
                nxt[tuple(a + b for a, b in zip(state, perm))] += p * w
        dist = nxt
    tol = 1e-9 * max(1.0, observed)
    return min(1.0, sum(p for state, p in dist.items()
                        if _statistic(np.array(state) / 2.0, D, A) >= observed - tol))


def _exact_feasible(D, A):
    return A <= 6 and float(D * (A - 1) * 2 + 1) ** (A - 1) <= 2e5


def friedman_test(ap_matrix, method: str = "auto") -> FriedmanResult:
    """Friedman rank test over a ``datasets x algorithms`` matrix.

    The statistic is ``12 D / (A (A + 1)) * sum_j (Rbar_j - (A + 1) / 2) ** 2``.
    ``p_chi2`` is its chi-square tail with ``A - 1`` degrees of freedom. The
    reported ``p_value`` is exact (full enumeration of within-dataset rank
    permutations) when ``method="exact"``, or ``"auto"`` on small designs
    where the statistic is too discrete for the chi-square approximation;
    otherwise it equals ``p_chi2``.
    """
    X = _check_matrix(ap_matrix)
    D, A = X.shape
    R = _ranks(X)
    stat = _statistic(R.sum(axis=0), D, A)
    p_chi2 = float(stats.chi2.sf(stat, A - 1))
    if method == "chi2" or (method == "auto" and not _exact_feasible(D, A)):
        return FriedmanResult(stat, p_chi2, R.mean(axis=0), p_chi2, "chi2")
    if method not in ("auto", "exact"):
        raise ValueError(f"unknown method {method!r}")
    return FriedmanResult(stat, _exact_p(R, stat), R.mean(axis=0), p_chi2, "exact")


@dataclass
class PairwiseComparison:
    algorithm: int
    p_value: float
    significant: bool


def pairwise_vs_best(ap_matrix, alpha: float = 0.05, method: str = "auto"):
    """Two-algorithm Friedman tests of the best-ranked column against each other.

    Returns ``(best_index, comparisons)``. No multiplicity correction is
    applied; ``significant`` is ``p_value < alpha``.
    """
    X = _check_matrix(ap_matrix)
    best = int(np.argmin(_ranks(X).mean(axis=0)))
    out = []
    for j in range(X.shape[1]):
        if j == best:
            continue
        res = friedman_test(X[:, [best, j]], method=method)
        out.append(PairwiseComparison(j, res.p_value, res.p_value < alpha))
    return best, out


def rank_summary(reports):
    """Mean per-dataset MAP rank of each algorithm, best (lowest) first."""
    table = defaultdict(dict)
    algorithms = []
    for r in reports:
        table[r.dataset][r.detector] = r.map
        if r.detector not in algorithms:
            algorithms.append(r.detector)
    ranks = defaultdict(list)
    for dataset, row in table.items():
        missing = [a for a in algorithms if a not in row]
        if missing:
            raise ValueError(f"dataset {dataset!r} lacks results for {missing}")
        values = np.array([row[a] for a in algorithms])
        for a, r in zip(algorithms, stats.rankdata(-values, method="average")):
            ranks[a].append(float(r))
    summary = [(a, float(np.mean(ranks[a]))) for a in algorithms]
    return sorted(summary, key=lambda t: (t[1], algorithms.index(t[0])))


# -- report files ---------------------------------------------------------------

def write_fold_csv(reports, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "fold", "ap"])
        for r in reports:
            for f, ap in enumerate(r.fold_ap):
                w.writerow([r.dataset, r.detector, f, repr(float(ap))])


def write_summary_csv(reports, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "algorithm", "map", "std"])
        for r in reports:
            w.writerow([r.dataset, r.detector, repr(r.map), repr(r.std)])


def format_friedman(result: FriedmanResult, algorithms, title="friedman",
                    pairwise=None, alpha=0.05) -> str:
    lines = [f"[{title}]",
             f"statistic = {result.statistic:.6f}",
             f"p_value = {result.p_value:.6g} ({result.method})",
             f"p_chi2 = {result.p_chi2:.6g}",
             "mean_ranks:"]
    for name, r in sorted(zip(algorithms, result.mean_ranks), key=lambda t: t[1]):
        lines.append(f"  {name} {r:.4f}")
    if pairwise is not None:
        best, comps = pairwise
        lines.append(f"best = {algorithms[best]}")
        for c in comps:
            verdict = "different" if c.significant else "not different"
            lines.append(f"  vs {algorithms[c.algorithm]}: p = {c.p_value:.6g} "
                         f"({verdict} at alpha={alpha})")
    return "\n".join(lines) + "\n"


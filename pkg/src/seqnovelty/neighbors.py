"""Distance-based novelty detectors: kNN, LOF and k-medoids.

All three work on precomputed normalized distance matrices from
:mod:`seqnovelty.distance`. Scores are oriented so that higher means more
anomalous. Neighbor ties are broken by training index (stable sort).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distance import MetricKind, cross_matrix, pairwise_matrix

#: LOF returned when the neighbors' density is infinite but the query's is not.
LOF_SENTINEL = 1e12


def _round_half_up(v):
    return int(np.floor(v + 0.5))


def default_knn_k(n: int) -> int:
    return min(n, max(_round_half_up(0.1 * n), 20))


def default_lof_k(n: int) -> int:
    return min(n - 1, max(_round_half_up(0.1 * n), 50))


def _as_matrix(m):
    return np.asarray(m, dtype=np.float64)


def _score_all(model, sequences, score_fn):
    if len(sequences) == 0:
        return np.zeros(0)
    D = _as_matrix(cross_matrix(model.kind, sequences, model.train))
    return score_fn(D)


# -- kNN ----------------------------------------------------------------------

@dataclass
class KnnModel:
    train: list
    kind: MetricKind
    k: int
    train_matrix: np.ndarray = field(repr=False, default=None)

    def score_matrix(self, D):
        """k-th smallest distance per row of a test x train matrix."""
        D = _as_matrix(D)
        return np.partition(D, self.k - 1, axis=1)[:, self.k - 1]

    def score(self, sequences) -> np.ndarray:
        return _score_all(self, sequences, self.score_matrix)

    def train_scores(self) -> np.ndarray:
        """Leave-one-out k-th neighbor distance of every training sequence."""
        n = len(self.train)
        if n < 2:
            return np.zeros(n)
        D = self.train_matrix.copy()
        np.fill_diagonal(D, np.inf)
        k = min(self.k, n - 1)
        return np.partition(D, k - 1, axis=1)[:, k - 1]


def knn_fit(train, kind="lcs", k=None, train_matrix=None) -> KnnModel:
    """Store the training set and its pairwise distance matrix.

    ``k`` defaults to ``max(round(0.1 n), 20)`` clamped to ``n``.
    """
    if len(train) < 1:
        raise ValueError("kNN needs at least one training sequence")
    kind = MetricKind.parse(kind)
    n = len(train)
    if k is None:
        k = default_knn_k(n)
    elif k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    k = min(int(k), n)
    if train_matrix is None:
        train_matrix = _as_matrix(pairwise_matrix(kind, train))
    return KnnModel(list(train), kind, k, _as_matrix(train_matrix))


def knn_score(model: KnnModel, x) -> float:
    return float(model.score([x])[0])


# -- LOF ----------------------------------------------------------------------

def _knn_rows(D, k):
    """Indices of the k nearest columns per row, ties broken by column index."""
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    return order


def _lrd(reach):
    mean = reach.mean(axis=1)
    with np.errstate(divide="ignore"):
        return np.where(mean > 0, 1.0 / np.where(mean > 0, mean, 1.0), np.inf)


def _lof_ratio(neighbor_lrd, own_lrd):
    num = neighbor_lrd.mean(axis=1)
    out = np.empty_like(own_lrd)
    inf_own = np.isinf(own_lrd)
    inf_num = np.isinf(num)
    out[inf_own] = 1.0
    both_finite = ~inf_own & ~inf_num
    out[both_finite] = num[both_finite] / own_lrd[both_finite]
    out[~inf_own & inf_num] = LOF_SENTINEL
    return out


@dataclass
class LofModel:
    train: list
    kind: MetricKind
    k: int
    train_matrix: np.ndarray = field(repr=False)
    kdist: np.ndarray = field(repr=False)
    lrd: np.ndarray = field(repr=False)

    def score_matrix(self, D):
        D = _as_matrix(D)
        nbrs = _knn_rows(D, self.k)
        d = np.take_along_axis(D, nbrs, axis=1)
        reach = np.maximum(self.kdist[nbrs], d)
        return _lof_ratio(self.lrd[nbrs], _lrd(reach))

    def score(self, sequences) -> np.ndarray:
        return _score_all(self, sequences, self.score_matrix)


def lof_fit(train, kind="lcs", k=None, train_matrix=None) -> LofModel:
    """Precompute k-distances and local reachability densities of the training set.

    A training point is never its own neighbor; exact duplicates of it are.
    ``k`` defaults to ``max(round(0.1 n), 50)`` clamped to ``n - 1``.
    """
    n = len(train)
    if n < 2:
        raise ValueError("LOF needs at least two training sequences")
    kind = MetricKind.parse(kind)
    if k is None:
        k = default_lof_k(n)
    elif k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    k = min(int(k), n - 1)
    if train_matrix is None:
        train_matrix = pairwise_matrix(kind, train)
    D = _as_matrix(train_matrix)
    masked = D.copy()
    np.fill_diagonal(masked, np.inf)
    nbrs = _knn_rows(masked, k)
    d = np.take_along_axis(masked, nbrs, axis=1)
    kdist = d[:, -1].copy()
    reach = np.maximum(kdist[nbrs], d)
    return LofModel(list(train), kind, k, D, kdist, _lrd(reach))


def lof_score(model: LofModel, x) -> float:
    return float(model.score([x])[0])


# -- k-medoids ----------------------------------------------------------------

@dataclass
class KMedoidsModel:
    medoids: list
    kind: MetricKind
    medoid_indices: np.ndarray
    objective: float
    objective_trace: list = field(default_factory=list)
    n_iter: int = 0

    def score_matrix(self, D):
        return _as_matrix(D).min(axis=1)

    def score(self, sequences) -> np.ndarray:
        if len(sequences) == 0:
            return np.zeros(0)
        D = cross_matrix(self.kind, sequences, self.medoids)
        return self.score_matrix(D)


def _assign(D, medoids):
    labels = np.argmin(D[:, medoids], axis=1)
    labels[medoids] = np.arange(len(medoids))
    return labels


def _initial_medoids(D, k, rng):
    # random order, skipping exact duplicates of already chosen medoids
    order = rng.permutation(D.shape[0])
    chosen = []
    for i in order:
        if all(D[i, j] > 0 for j in chosen):
            chosen.append(i)
            if len(chosen) == k:
                break
    if len(chosen) < k:
        rest = [i for i in order if i not in chosen]
        chosen += rest[:k - len(chosen)]
    return np.sort(np.array(chosen, dtype=np.int64))


def kmedoids_cluster(D, k, max_iters=100, seed=0):
    """Alternating k-medoids on a precomputed square matrix.

    Returns ``(medoid_indices, labels, objective_trace)``. Initial medoids
    are drawn at random among distinct samples. Each cluster's new medoid is
    its member with the smallest summed distance to the others; the current
    medoid is kept when it is among the minimizers.
    """
    D = _as_matrix(D)
    n = D.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds the number of training samples {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    medoids = _initial_medoids(D, k, rng)
    labels = _assign(D, medoids)
    rows = np.arange(n)
    trace = [float(D[rows, medoids[labels]].sum())]
    for _ in range(max_iters):
        new = medoids.copy()
        for c in range(k):
            members = np.flatnonzero(labels == c)
            cost = D[np.ix_(members, members)].sum(axis=1)
            cur_pos = np.flatnonzero(members == medoids[c])[0]
            if cost[cur_pos] > cost.min():
                new[c] = members[np.argmin(cost)]
        if np.array_equal(new, medoids):
            break
        medoids = new
        labels = _assign(D, medoids)
        trace.append(float(D[rows, medoids[labels]].sum()))
    return medoids, labels, trace


def kmedoids_fit(train, kind="lcs", k=2, max_iters=100, seed=0,
                 train_matrix=None) -> KMedoidsModel:
    """Cluster the training set and keep the medoid sequences for scoring."""
    n = len(train)
    if k > n:
        raise ValueError(f"k={k} exceeds the number of training samples {n}")
    kind = MetricKind.parse(kind)
    if train_matrix is None:
        train_matrix = pairwise_matrix(kind, train)
    idx, _, trace = kmedoids_cluster(train_matrix, k, max_iters, seed)
    return KMedoidsModel(
        medoids=[train[i] for i in idx],
        kind=kind,
        medoid_indices=idx,
        objective=trace[-1],
        objective_trace=trace,
        n_iter=len(trace) - 1,
    )


def kmedoids_score(model: KMedoidsModel, x) -> float:
    return float(model.score([x])[0])

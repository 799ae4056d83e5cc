from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqnovelty.distance import cross_matrix, normalized_distance, pairwise_matrix
from seqnovelty.neighbors import (LOF_SENTINEL, default_knn_k, default_lof_k,
                                  kmedoids_cluster, kmedoids_fit, kmedoids_score,
                                  knn_fit, knn_score, lof_fit, lof_score)

from conftest import seq


def lof_by_definition(train, x, k, kind):
    """LOF computed literally from its definition with plain loops."""
    def d(a, b):
        return normalized_distance(kind, a, b)

    def neighbors(point, pool):
        # pool: list of (index, seq); exactly k nearest, ties by index
        ranked = sorted(pool, key=lambda t: (d(point, t[1]), t[0]))
        return ranked[:k]

    def pool_without(i):
        return [(j, s) for j, s in enumerate(train) if j != i]

    def k_distance(i):
        return d(train[i], neighbors(train[i], pool_without(i))[-1][1])

    def lrd_of(point, pool):
        reach = [max(k_distance(j), d(point, s)) for j, s in neighbors(point, pool)]
        m = sum(reach) / len(reach)
        return float("inf") if m == 0 else 1.0 / m

    full = list(enumerate(train))
    nbrs = neighbors(x, full)
    lrd_x = lrd_of(x, full)
    lrd_n = [lrd_of(train[j], pool_without(j)) for j, _ in nbrs]
    return (sum(lrd_n) / len(lrd_n)) / lrd_x


# documented 4-point configuration: three close training sequences and an
# isolated query, k = 2, Levenshtein metric
FOUR_POINT_TRAIN = [seq("aaaa"), seq("aaab"), seq("aaba")]
FOUR_POINT_QUERY = seq("cccc")


def test_default_k():
    assert default_knn_k(500) == 50
    assert default_knn_k(50) == 20
    assert default_knn_k(10) == 10
    assert default_lof_k(1000) == 100
    assert default_lof_k(60) == 50
    assert default_lof_k(10) == 9


def test_knn_fit_errors():
    with pytest.raises(ValueError):
        knn_fit([seq("a")], k=0)
    with pytest.raises(ValueError):
        knn_fit([])


def test_knn_duplicates_and_single():
    x = seq("abc")
    m = knn_fit([x, x, x, seq("zz")], "lcs", k=3)
    assert knn_score(m, x) == 0.0
    a, q = seq("aaaa"), seq("aaab")
    m = knn_fit([a], "lev", k=1)
    assert knn_score(m, q) == normalized_distance("lev", q, a)


def test_knn_matches_full_sort(rng):
    for _ in range(20):
        train = [rng.integers(0, 4, rng.integers(1, 8)).astype(np.int32) for _ in range(15)]
        x = rng.integers(0, 4, rng.integers(1, 8)).astype(np.int32)
        k = int(rng.integers(1, 16))
        for kind in ("lcs", "lev"):
            dists = sorted(normalized_distance(kind, x, t) for t in train)
            assert knn_score(knn_fit(train, kind, k), x) == dists[k - 1]


_seqs = st.lists(st.lists(st.integers(0, 3), min_size=1, max_size=6), min_size=2, max_size=10)


@settings(max_examples=60, deadline=None)
@given(_seqs, st.lists(st.integers(0, 3), min_size=1, max_size=6))
def test_knn_monotone_properties(train, x):
    train = [np.array(t, np.int32) for t in train]
    x = np.array(x, np.int32)
    n = len(train)
    scores = [knn_score(knn_fit(train, "lev", k), x) for k in range(1, n + 1)]
    assert all(a <= b for a, b in zip(scores, scores[1:]))
    k = max(1, n // 2)
    smaller = train[1:]
    assert knn_score(knn_fit(smaller, "lev", min(k, len(smaller))), x) >= \
        knn_score(knn_fit(train, "lev", k), x)


def test_knn_train_scores():
    train = [seq("ab"), seq("ab"), seq("cd")]
    m = knn_fit(train, "lev", k=1)
    assert m.train_scores().tolist() == [0.0, 0.0, 0.5]


def test_lof_equidistant():
    # length-1 distinct sequences: every normalized Levenshtein distance is 0.5
    train = [seq(c) for c in "abcdefg"]
    m = lof_fit(train, "lev", k=3)
    assert lof_score(m, seq("z")) == pytest.approx(1.0, abs=1e-12)


def test_lof_identical_training_set():
    train = [seq("abab")] * 6
    m = lof_fit(train, "lcs", k=3)
    assert np.all(np.isinf(m.lrd))
    assert lof_score(m, seq("abab")) == 1.0
    assert lof_score(m, seq("zz")) == LOF_SENTINEL


def test_lof_duplicate_cluster():
    train = [seq("abcabc")] * 4 + [seq("abcabd"), seq("bbcabc"), seq("zzzz")]
    m = lof_fit(train, "lev", k=3)
    assert lof_score(m, seq("abcabc")) == pytest.approx(1.0, abs=1e-9)


def test_lof_four_point_configuration():
    for kind in ("lev", "lcs"):
        m = lof_fit(FOUR_POINT_TRAIN, kind, k=2)
        got = lof_score(m, FOUR_POINT_QUERY)
        want = lof_by_definition(FOUR_POINT_TRAIN, FOUR_POINT_QUERY, 2, kind)
        assert got > 1.0
        assert got == pytest.approx(want, abs=1e-9)


def test_lof_against_definition_random(rng):
    for _ in range(10):
        train = [rng.integers(0, 3, rng.integers(2, 7)).astype(np.int32) for _ in range(9)]
        x = rng.integers(0, 3, rng.integers(2, 7)).astype(np.int32)
        m = lof_fit(train, "lev", k=3)
        want = lof_by_definition(train, x, 3, "lev")
        if np.isfinite(want):
            assert lof_score(m, x) == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_lof_fit_errors():
    with pytest.raises(ValueError):
        lof_fit([seq("a")], "lev")


def test_kmedoids_k_equals_n():
    train = [seq("ab"), seq("cd"), seq("ee")]
    m = kmedoids_fit(train, "lev", k=3, seed=0)
    assert m.objective == 0.0
    assert sorted(m.medoid_indices.tolist()) == [0, 1, 2]


def test_kmedoids_two_groups():
    train = [seq("aaaa")] * 4 + [seq("bbbb")] * 4
    for seed in range(5):
        m = kmedoids_fit(train, "lcs", k=2, seed=seed)
        assert m.objective == 0.0
        assert {tuple(x.tolist()) for x in m.medoids} == {(0,) * 4, (1,) * 4}


def test_kmedoids_exhaustive_oracle(rng):
    for _ in range(15):
        n = int(rng.integers(3, 9))
        train = [rng.integers(0, 3, rng.integers(1, 6)).astype(np.int32) for _ in range(n)]
        D = pairwise_matrix("lev", train).values
        best = min(D[:, [a, b]].min(axis=1).sum() for a, b in combinations(range(n), 2))
        objs = [kmedoids_fit(train, "lev", k=2, seed=s, train_matrix=D).objective
                for s in range(10)]
        assert min(objs) == pytest.approx(best, abs=1e-12)
        assert min(objs) >= best - 1e-12


def test_kmedoids_trace_non_increasing(rng):
    D = pairwise_matrix("lcs", [rng.integers(0, 5, 12).astype(np.int32) for _ in range(40)])
    for seed in range(5):
        _, _, trace = kmedoids_cluster(D, 3, seed=seed)
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_kmedoids_score():
    train = [seq("aaaa"), seq("aaab"), seq("bbbb"), seq("bbba")]
    m = kmedoids_fit(train, "lev", k=2, seed=1)
    for med in m.medoids:
        assert kmedoids_score(m, med) == 0.0
    x = seq("abab")
    assert kmedoids_score(m, x) == min(normalized_distance("lev", x, med) for med in m.medoids)
    single = kmedoids_fit(train, "lev", k=1)
    assert kmedoids_score(single, x) == normalized_distance("lev", x, single.medoids[0])


def test_kmedoids_too_many():
    with pytest.raises(ValueError):
        kmedoids_fit([seq("a")], "lev", k=2)


def test_alphabet_permutation_invariance(rng):
    train = [rng.integers(0, 5, rng.integers(3, 10)).astype(np.int32) for _ in range(20)]
    test = [rng.integers(0, 5, rng.integers(3, 10)).astype(np.int32) for _ in range(5)]
    perm = rng.permutation(5).astype(np.int32)
    ptrain, ptest = [perm[s] for s in train], [perm[s] for s in test]
    for fit in (lambda t: knn_fit(t, "lcs", 4), lambda t: lof_fit(t, "lev", 4),
                lambda t: kmedoids_fit(t, "lcs", 2, seed=3)):
        assert np.array_equal(fit(train).score(test), fit(ptrain).score(ptest))


def test_score_matrix_consistency(rng):
    train = [rng.integers(0, 4, 6).astype(np.int32) for _ in range(12)]
    test = [rng.integers(0, 4, 6).astype(np.int32) for _ in range(3)]
    m = knn_fit(train, "lev", 5)
    C = cross_matrix("lev", test, train)
    assert np.array_equal(m.score_matrix(C), m.score(test))

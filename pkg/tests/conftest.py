import numpy as np
import pytest

from seqnovelty.seqcore import ANOMALY, LabeledDataset, SymbolTable

_ACCEPTANCE = []


def seq(text):
    """'abca' -> int32 ids with a=0, b=1, ..."""
    return np.array([ord(c) - ord("a") for c in text], dtype=np.int32)


def random_dataset(rng, n_nominal, n_anomaly, sigma=4, max_len=6):
    table = SymbolTable(str(i) for i in range(sigma)).freeze()
    n = n_nominal + n_anomaly
    seqs = [rng.integers(0, sigma, rng.integers(1, max_len + 1)).astype(np.int32)
            for _ in range(n)]
    labels = np.array([0] * n_nominal + [ANOMALY] * n_anomaly, dtype=np.int8)
    perm = rng.permutation(n)
    return LabeledDataset([seqs[i] for i in perm], labels[perm], table)


class ConstantDetector:
    name = "constant"

    def fit(self, train):
        return self

    def score(self, sequences):
        return np.zeros(len(sequences))


class LabelOracleDetector:
    """Scores 1.0 for the anomalous sequence objects of ``ds``, 0.0 otherwise.

    Keyed by object identity so duplicate sequences with different labels
    stay distinguishable; fold subsets share the original arrays.
    """

    name = "oracle"

    def __init__(self, ds):
        self.anomalous = {id(s) for s, y in zip(ds.sequences, ds.labels) if y == ANOMALY}

    def fit(self, train):
        return self

    def score(self, sequences):
        return np.array([float(id(s) in self.anomalous) for s in sequences])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)

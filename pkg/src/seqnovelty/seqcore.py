"""Symbol interning, labeled sequence datasets, stratified splits and file I/O.

Dataset files are UTF-8 text with one sequence per line::

    <label>\t<tok1> <tok2> ... <tokM>

where ``label`` is ``0`` (nominal) or ``1`` (anomaly). Blank lines and lines
starting with ``#`` are skipped.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence as _Seq

import numpy as np

#: Reserved id for tokens looked up after the table has been frozen.
UNSEEN = -1

NOMINAL = 0
ANOMALY = 1


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be parsed."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class SymbolTable:
    """Bijective mapping between textual tokens and dense integer ids.

    Ids are assigned in order of first registration, starting at 0. Once
    frozen, unknown tokens map to :data:`UNSEEN` and the table never grows.
    """

    def __init__(self, tokens: Iterable[str] = ()):
        self.token_to_id: dict[str, int] = {}
        self.id_to_token: list[str] = []
        self.frozen = False
        for tok in tokens:
            self.add(tok)

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token):
        return token in self.token_to_id

    def __repr__(self):
        state = "frozen" if self.frozen else "open"
        return f"SymbolTable({len(self)} symbols, {state})"

    def add(self, token: str) -> int:
        """Return the id of ``token``, registering it if the table is open."""
        idx = self.token_to_id.get(token)
        if idx is not None:
            return idx
        if self.frozen:
            return UNSEEN
        idx = len(self.id_to_token)
        self.token_to_id[token] = idx
        self.id_to_token.append(token)
        return idx

    def lookup(self, token: str) -> int:
        return self.token_to_id.get(token, UNSEEN)

    def freeze(self) -> "SymbolTable":
        self.frozen = True
        return self

    def encode(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.add(t) for t in tokens], dtype=np.int32)

    def decode(self, ids: Iterable[int]) -> list[str]:
        out = []
        for i in ids:
            if i == UNSEEN:
                raise KeyError("UNSEEN id has no token")
            out.append(self.id_to_token[i])
        return out

    @property
    def sigma(self) -> int:
        """Alphabet size (number of registered symbols)."""
        return len(self)


def as_sequence(symbols) -> np.ndarray:
    """Coerce ``symbols`` to a 1-d ``int32`` sequence, rejecting empty input."""
    seq = np.ascontiguousarray(symbols, dtype=np.int32)
    if seq.ndim != 1:
        raise ValueError("a sequence must be one-dimensional")
    if seq.size == 0:
        raise ValueError("empty sequences are not allowed")
    return seq


@dataclass
class LabeledDataset:
    """Sequences with binary anomaly labels sharing one :class:`SymbolTable`."""

    sequences: list
    labels: np.ndarray
    table: SymbolTable
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sequences = [as_sequence(s) for s in self.sequences]
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.labels.ndim != 1 or len(self.labels) != len(self.sequences):
            raise ValueError("labels must be a flat array parallel to sequences")
        if np.any((self.labels != NOMINAL) & (self.labels != ANOMALY)):
            raise ValueError("labels must be 0 (nominal) or 1 (anomaly)")

    def __len__(self):
        return len(self.sequences)

    @property
    def n_anomalies(self) -> int:
        return int(self.labels.sum())

    @property
    def anomaly_proportion(self) -> float:
        if len(self) == 0:
            return 0.0
        return self.n_anomalies / len(self)

    def subset(self, indices) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            [self.sequences[i] for i in indices],
            self.labels[indices],
            self.table,
            dict(self.meta),
        )

    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.sequences], dtype=np.int64)


def parse_lines(lines, table=None, path=None) -> LabeledDataset:
    """Parse dataset lines. A fresh table is built and frozen unless given."""
    own_table = table is None
    if own_table:
        table = SymbolTable()
    seqs, labels = [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        label_str, sep, body = line.partition("\t")
        if not sep:
            raise DatasetFormatError("expected '<label>\\t<tokens>'", lineno, path)
        label_str = label_str.strip()
        if label_str not in ("0", "1"):
            raise DatasetFormatError(f"unknown label {label_str!r}", lineno, path)
        tokens = body.split()
        if not tokens:
            raise DatasetFormatError("empty token list", lineno, path)
        seqs.append(table.encode(tokens))
        labels.append(int(label_str))
    if own_table:
        table.freeze()
    return LabeledDataset(seqs, np.array(labels, dtype=np.int8), table,
                          {"source": str(path)} if path is not None else {})


def load_dataset(path, table: SymbolTable | None = None) -> LabeledDataset:
    """Read a dataset file.

    When ``table`` is given (typically the frozen table of a training set),
    tokens it does not know become :data:`UNSEEN`.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh, table=table, path=os.fspath(path))


def format_dataset(ds: LabeledDataset) -> str:
    lines = []
    for seq, label in zip(ds.sequences, ds.labels):
        lines.append(f"{int(label)}\t" + " ".join(ds.table.decode(seq.tolist())))
    return "".join(line + "\n" for line in lines)


def write_dataset(ds: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_dataset(ds))


def _class_indices(labels, rng):
    out = []
    for cls in (NOMINAL, ANOMALY):
        idx = np.flatnonzero(labels == cls)
        out.append(rng.permutation(idx))
    return out


def split_train_test(ds: LabeledDataset, train_ratio: float = 0.7, seed: int = 0):
    """Stratified random split.

    Each class is shuffled independently and ``floor(train_ratio * n_class)``
    of its members go to the training part, so both parts keep the anomaly
    proportion of ``ds`` up to one sample per class. Members keep their
    original relative order inside each part.
    """
    if not 0.0 < train_ratio < 1.0:
        raise ValueError(f"train_ratio must lie in (0, 1), got {train_ratio}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for idx in _class_indices(ds.labels, rng):
        n_train = int(np.floor(train_ratio * len(idx) + 1e-9))
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return ds.subset(train_idx), ds.subset(test_idx)


def stratified_kfold(ds: LabeledDataset, k: int = 5, seed: int = 0):
    """Return ``k`` stratified ``(train, test)`` pairs.

    Shuffled nominal indices followed by shuffled anomaly indices are dealt
    round-robin over the folds, so per-class counts and total fold sizes
    each differ by at most one between folds.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > len(ds):
        raise ValueError(f"cannot build {k} folds from {len(ds)} samples")
    rng = np.random.default_rng(seed)
    order = np.concatenate(_class_indices(ds.labels, rng))
    fold_of = np.empty(len(ds), dtype=np.int64)
    fold_of[order] = np.arange(len(order)) % k
    pairs = []
    for f in range(k):
        test_idx = np.flatnonzero(fold_of == f)
        train_idx = np.flatnonzero(fold_of != f)
        pairs.append((ds.subset(train_idx), ds.subset(test_idx)))
    return pairs


def dataset_from_tokens(rows: _Seq, labels: _Seq) -> LabeledDataset:
    """Build a dataset from token lists, e.g. ``[["a", "b"], ["c"]]``."""
    table = SymbolTable()
    seqs = [table.encode(r) for r in rows]
    table.freeze()
    return LabeledDataset(seqs, np.asarray(labels, dtype=np.int8), table)

"""t-STIDE: sliding-window frequency model scored by Locality Frame Count.

Training stores every contiguous window of ``window_len`` symbols with its
count. A test sequence's score is the fraction of its windows that are
absent from the model or whose relative frequency is below ``threshold``.
Sequences shorter than ``window_len`` are handled as one window of their own
length, kept in a separate table for that length.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np


def windows(seq, k):
    """Contiguous windows of ``seq`` as tuples; one full-length window if short."""
    lst = seq.tolist() if hasattr(seq, "tolist") else list(seq)
    if len(lst) <= k:
        return [tuple(lst)]
    return list(zip(*(lst[i:] for i in range(k))))


@dataclass
class StideModel:
    window_len: int = 6
    threshold: float = 1e-5
    tables: dict = field(default_factory=dict, repr=False)

    def frequency(self, window) -> float:
        entry = self.tables.get(len(window))
        if entry is None:
            return 0.0
        counts, total = entry
        return counts.get(tuple(window), 0) / total

    def _score_one(self, seq) -> float:
        wins = windows(seq, self.window_len)
        entry = self.tables.get(len(wins[0]))
        if entry is None:
            return 1.0
        counts, total = entry
        cutoff = self.threshold * total
        bad = 0
        for w in wins:
            c = counts.get(w, 0)
            if c == 0 or c < cutoff:
                bad += 1
        return bad / len(wins)

    def score(self, sequences):
        return np.array([self._score_one(s) for s in sequences], dtype=np.float64)


def stide_fit(train, window_len: int = 6, threshold: float = 1e-5) -> StideModel:
    if window_len < 1:
        raise ValueError("window_len must be >= 1")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    counters: dict[int, Counter] = {}
    totals: dict[int, int] = {}
    for seq in train:
        lst = seq.tolist() if hasattr(seq, "tolist") else list(seq)
        if len(lst) <= window_len:
            L, n, wins = len(lst), 1, (tuple(lst),)
        else:
            L, n = window_len, len(lst) - window_len + 1
            wins = zip(*(lst[i:] for i in range(window_len)))
        counters.setdefault(L, Counter()).update(wins)
        totals[L] = totals.get(L, 0) + n
    tables = {L: (c, totals[L]) for L, c in counters.items()}
    return StideModel(window_len, threshold, tables)


def stide_score(model: StideModel, x) -> float:
    return model._score_one(x)

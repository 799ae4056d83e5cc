"""LCS and Levenshtein sequence metrics and dense distance matrices.

Both metrics are normalized by the summed length of the two sequences:

* Levenshtein: ``lev(x, y) / (|x| + |y|)``, in ``[0, 1)``.
* LCS: ``1 - 2 * lcs(x, y) / (|x| + |y|)``, in ``[0, 1]``. This is an affine
  map of ``-lcs / (|x| + |y|)`` that keeps ``d(x, x) == 0`` and all values
  non-negative.

The dynamic programs run in numba with two rolling rows. Matrix builders
evaluate every cell independently, so results do not depend on the number
of worker threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np


class MetricKind(str, enum.Enum):
    LCS = "lcs"
    LEVENSHTEIN = "lev"

    @classmethod
    def parse(cls, value) -> "MetricKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"lcs": cls.LCS, "lev": cls.LEVENSHTEIN,
                   "levenshtein": cls.LEVENSHTEIN, "edit": cls.LEVENSHTEIN}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown metric {value!r}") from None

    @property
    def code(self) -> int:
        return 0 if self is MetricKind.LCS else 1


@dataclass
class DistanceMatrix:
    values: np.ndarray
    symmetric: bool = False

    @property
    def shape(self):
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


# -- kernels -----------------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _lcs_kernel(a, b, prev, cur):
    # caller guarantees len(b) <= len(a) and buffers of size len(b) + 1
    m = b.shape[0]
    for j in range(m + 1):
        prev[j] = 0
    cur[0] = 0
    for i in range(a.shape[0]):
        ai = a[i]
        for j in range(m):
            if ai == b[j]:
                cur[j + 1] = prev[j] + 1
            elif prev[j + 1] >= cur[j]:
                cur[j + 1] = prev[j + 1]
            else:
                cur[j + 1] = cur[j]
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


@numba.njit(cache=True, nogil=True)
def _lev_kernel(a, b, prev, cur):
    m = b.shape[0]
    for j in range(m + 1):
        prev[j] = j
    for i in range(a.shape[0]):
        ai = a[i]
        cur[0] = i + 1
        for j in range(m):
            sub = prev[j] + (0 if ai == b[j] else 1)
            dele = prev[j + 1] + 1
            ins = cur[j] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            cur[j + 1] = best
        for j in range(m + 1):
            prev[j] = cur[j]
    return prev[m]


@numba.njit(cache=True, nogil=True)
def _raw(code, a, b, prev, cur):
    if a.shape[0] < b.shape[0]:
        a, b = b, a
    if code == 0:
        return _lcs_kernel(a, b, prev, cur)
    return _lev_kernel(a, b, prev, cur)


@numba.njit(cache=True, nogil=True)
def _normalized(code, a, b, prev, cur):
    total = a.shape[0] + b.shape[0]
    r = _raw(code, a, b, prev, cur)
    if code == 0:
        return 1.0 - 2.0 * r / total
    return r / total


@numba.njit(cache=True, parallel=True, nogil=True)
def _pairwise(code, flat, offsets, maxlen):
    n = offsets.shape[0] - 1
    out = np.zeros((n, n), dtype=np.float64)
    for i in numba.prange(n):
        prev = np.empty(maxlen + 1, dtype=np.int32)
        cur = np.empty(maxlen + 1, dtype=np.int32)
        a = flat[offsets[i]:offsets[i + 1]]
        for j in range(i + 1, n):
            b = flat[offsets[j]:offsets[j + 1]]
            d = _normalized(code, a, b, prev, cur)
            out[i, j] = d
            out[j, i] = d
    return out


@numba.njit(cache=True, parallel=True, nogil=True)
def _cross(code, flat_a, off_a, flat_b, off_b, maxlen):
    n = off_a.shape[0] - 1
    m = off_b.shape[0] - 1
    out = np.empty((n, m), dtype=np.float64)
    for i in numba.prange(n):
        prev = np.empty(maxlen + 1, dtype=np.int32)
        cur = np.empty(maxlen + 1, dtype=np.int32)
        a = flat_a[off_a[i]:off_a[i + 1]]
        for j in range(m):
            b = flat_b[off_b[j]:off_b[j + 1]]
            out[i, j] = _normalized(code, a, b, prev, cur)
    return out


# -- public API ---------------------------------------------------------------

def pack(sequences):
    """Concatenate sequences into ``(flat, offsets, max_length)``."""
    lengths = np.fromiter((len(s) for s in sequences), dtype=np.int64,
                          count=len(sequences))
    offsets = np.zeros(len(sequences) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    if len(sequences):
        flat = np.concatenate([np.asarray(s, dtype=np.int32) for s in sequences])
    else:
        flat = np.zeros(0, dtype=np.int32)
    maxlen = int(lengths.max()) if len(lengths) else 0
    return flat, offsets, maxlen


def _pair(x, y):
    a = np.ascontiguousarray(x, dtype=np.int32)
    b = np.ascontiguousarray(y, dtype=np.int32)
    n = min(len(a), len(b)) + 1
    return a, b, np.empty(n, np.int32), np.empty(n, np.int32)


def lcs_length(x, y) -> int:
    """Length of the longest common (not necessarily contiguous) subsequence."""
    return int(_raw(0, *_pair(x, y)))


def levenshtein(x, y) -> int:
    """Minimum number of insertions, deletions and substitutions turning x into y."""
    return int(_raw(1, *_pair(x, y)))


def normalized_distance(kind, x, y) -> float:
    kind = MetricKind.parse(kind)
    if len(x) + len(y) == 0:
        raise ValueError("cannot normalize two empty sequences")
    return float(_normalized(kind.code, *_pair(x, y)))


def pairwise_matrix(kind, data) -> DistanceMatrix:
    """Symmetric matrix of normalized distances between all pairs in ``data``."""
    kind = MetricKind.parse(kind)
    if len(data) == 0:
        raise ValueError("pairwise_matrix needs at least one sequence")
    flat, offsets, maxlen = pack(data)
    return DistanceMatrix(_pairwise(kind.code, flat, offsets, maxlen), symmetric=True)


def cross_matrix(kind, test, train) -> DistanceMatrix:
    """``|test| x |train|`` matrix with cell ``(i, j) = d(test[i], train[j])``."""
    kind = MetricKind.parse(kind)
    if len(test) == 0 or len(train) == 0:
        raise ValueError("cross_matrix needs non-empty inputs")
    fa, oa, la = pack(test)
    fb, ob, lb = pack(train)
    values = _cross(kind.code, fa, oa, fb, ob, max(la, lb))
    return DistanceMatrix(values, symmetric=False)


def write_matrix_csv(matrix, path) -> None:
    """Dump a matrix as row-major ``i,j,d`` CSV."""
    values = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("i,j,d\n")
        for i in range(values.shape[0]):
            for j in range(values.shape[1]):
                fh.write(f"{i},{j},{float(values[i, j])!r}\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.size == 0:
        return np.zeros((0, 0))
    n = int(rows[:, 0].max()) + 1
    m = int(rows[:, 1].max()) + 1
    out = np.zeros((n, m))
    out[rows[:, 0].astype(int), rows[:, 1].astype(int)] = rows[:, 2]
    return out

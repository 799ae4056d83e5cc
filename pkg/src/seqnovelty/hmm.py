"""Discrete-emission hidden Markov model trained by Baum-Welch.

Emission matrices carry one extra column for symbols never seen during
training (ids outside ``[0, n_symbols)``, including ``UNSEEN``). Every
emission entry is kept at or above ``emission_floor`` so that any sequence
has a finite likelihood. The score of a sequence is its per-symbol negative
log-likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .distance import pack


@dataclass(frozen=True)
class HmmTrainConfig:
    components: int = 3
    max_iters: int = 30
    tol: float = 1e-2
    seed: int = 0
    emission_floor: float = 1e-6

    def __post_init__(self):
        if self.components < 1:
            raise ValueError("components must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.emission_floor < 1:
            raise ValueError("emission_floor must lie in (0, 1)")


@dataclass
class HmmModel:
    pi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    loglik_trace: list = field(default_factory=list, repr=False)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_symbols(self) -> int:
        """Number of training symbols (the UNSEEN column excluded)."""
        return self.B.shape[1] - 1

    def loglik(self, sequences) -> np.ndarray:
        if len(sequences) == 0:
            return np.zeros(0)
        flat, offsets, _ = pack(sequences)
        cols = _columns(flat, self.n_symbols)
        return _forward_many(cols, offsets, self.pi, self.A, self.B)

    def score(self, sequences) -> np.ndarray:
        if len(sequences) == 0:
            return np.zeros(0)
        lengths = np.array([len(s) for s in sequences], dtype=np.float64)
        return -self.loglik(sequences) / lengths


def _columns(flat, n_symbols):
    cols = flat.astype(np.int64)
    cols[(cols < 0) | (cols >= n_symbols)] = n_symbols
    return cols


# -- kernels -------------------------------------------------------------------

@numba.njit(cache=True)
def _forward(cols, pi, A, B, alpha, scale):
    S = A.shape[0]
    T = cols.shape[0]
    c = 0.0
    for s in range(S):
        alpha[0, s] = pi[s] * B[s, cols[0]]
        c += alpha[0, s]
    scale[0] = c
    for s in range(S):
        alpha[0, s] /= c
    for t in range(1, T):
        c = 0.0
        o = cols[t]
        for j in range(S):
            acc = 0.0
            for i in range(S):
                acc += alpha[t - 1, i] * A[i, j]
            acc *= B[j, o]
            alpha[t, j] = acc
            c += acc
        scale[t] = c
        for j in range(S):
            alpha[t, j] /= c
    ll = 0.0
    for t in range(T):
        ll += math.log(scale[t])
    return ll


@numba.njit(cache=True)
def _forward_many(cols, offsets, pi, A, B):
    n = offsets.shape[0] - 1
    S = A.shape[0]
    out = np.empty(n)
    for k in range(n):
        seq = cols[offsets[k]:offsets[k + 1]]
        T = seq.shape[0]
        alpha = np.empty((T, S))
        scale = np.empty(T)
        out[k] = _forward(seq, pi, A, B, alpha, scale)
    return out


@numba.njit(cache=True)
def _estep(cols, offsets, pi, A, B):
    n = offsets.shape[0] - 1
    S = A.shape[0]
    V = B.shape[1]
    pi_acc = np.zeros(S)
    A_acc = np.zeros((S, S))
    B_acc = np.zeros((S, V))
    total = 0.0
    for k in range(n):
        seq = cols[offsets[k]:offsets[k + 1]]
        T = seq.shape[0]
        alpha = np.empty((T, S))
        scale = np.empty(T)
        total += _forward(seq, pi, A, B, alpha, scale)
        beta = np.empty((T, S))
        for s in range(S):
            beta[T - 1, s] = 1.0
        for t in range(T - 2, -1, -1):
            o = seq[t + 1]
            for i in range(S):
                acc = 0.0
                for j in range(S):
                    acc += A[i, j] * B[j, o] * beta[t + 1, j]
                beta[t, i] = acc / scale[t + 1]
        for t in range(T):
            o = seq[t]
            for s in range(S):
                g = alpha[t, s] * beta[t, s]
                B_acc[s, o] += g
                if t == 0:
                    pi_acc[s] += g
        for t in range(T - 1):
            o = seq[t + 1]
            inv = 1.0 / scale[t + 1]
            for i in range(S):
                ai = alpha[t, i] * inv
                for j in range(S):
                    A_acc[i, j] += ai * A[i, j] * B[j, o] * beta[t + 1, j]
    return total, pi_acc, A_acc, B_acc


# -- training ------------------------------------------------------------------

def floor_normalize(counts, floor):
    """Maximize ``sum(counts * log p)`` over distributions with every ``p >= floor``.

    Entries whose proportional share falls under ``floor`` are clamped to it
    and the remaining mass is redistributed until no entry is below.
    """
    counts = np.asarray(counts, dtype=np.float64)
    V = counts.shape[0]
    if floor * V > 1:
        raise ValueError("emission_floor too large for the alphabet size")
    free = np.ones(V, dtype=bool)
    while True:
        mass = 1.0 - floor * (V - free.sum())
        c = counts[free]
        tot = c.sum()
        p = np.full(V, floor)
        p[free] = mass * (c / tot if tot > 0 else np.full(c.shape, 1.0 / c.size))
        low = free & (p < floor)
        if not low.any():
            return p
        free &= ~low


def _normalize_rows(acc, fallback):
    sums = acc.sum(axis=1, keepdims=True)
    out = fallback.copy()
    ok = sums[:, 0] > 0
    out[ok] = acc[ok] / sums[ok]
    return out


def _init_params(cols, S, V, cfg):
    rng = np.random.default_rng(cfg.seed)
    pi = rng.uniform(0.05, 1.0, size=S)
    pi /= pi.sum()
    A = rng.uniform(0.05, 1.0, size=(S, S))
    A /= A.sum(axis=1, keepdims=True)
    # random emission weights are drawn per symbol in order of first
    # appearance, not per id, so relabeling the alphabet permutes B exactly;
    # symbols absent from training start at the floor
    uniq, first = np.unique(cols, return_index=True)
    by_appearance = uniq[np.argsort(first, kind="stable")]
    W = rng.uniform(0.05, 1.0, size=(S, by_appearance.shape[0]))
    B_acc = np.zeros((S, V))
    B_acc[:, by_appearance] = W
    B = np.vstack([floor_normalize(B_acc[s], cfg.emission_floor) for s in range(S)])
    return pi, A, B


def hmm_fit(train, cfg: HmmTrainConfig | None = None, n_symbols=None) -> HmmModel:
    """Estimate ``(pi, A, B)`` by EM with scaled forward-backward passes.

    ``n_symbols`` defaults to the largest training id plus one. Training
    stops once the total log-likelihood improves by less than ``cfg.tol``
    or after ``cfg.max_iters`` EM steps.
    """
    if cfg is None:
        cfg = HmmTrainConfig()
    if len(train) == 0:
        raise ValueError("HMM training needs at least one sequence")
    flat, offsets, _ = pack(train)
    if n_symbols is None:
        n_symbols = int(flat[flat >= 0].max()) + 1 if np.any(flat >= 0) else 1
    V = n_symbols + 1
    if not cfg.emission_floor * V < 1:
        raise ValueError("emission_floor must be below 1 / (n_symbols + 1)")
    cols = _columns(flat, n_symbols)
    S = cfg.components
    pi, A, B = _init_params(cols, S, V, cfg)
    trace = []
    for _ in range(cfg.max_iters):
        ll, pi_acc, A_acc, B_acc = _estep(cols, offsets, pi, A, B)
        trace.append(float(ll))
        pi = pi_acc / pi_acc.sum()
        A = _normalize_rows(A_acc, A)
        B = np.vstack([floor_normalize(B_acc[s], cfg.emission_floor)
                       for s in range(S)])
        if len(trace) > 1 and trace[-1] - trace[-2] < cfg.tol:
            break
    return HmmModel(pi, A, B, trace)


def forward_loglik(model: HmmModel, x) -> float:
    """``log P(x | model)`` by the scaled forward recursion."""
    return float(model.loglik([x])[0])


def hmm_score(model: HmmModel, x) -> float:
    return float(model.score([x])[0])


def hmm_sample(model: HmmModel, length: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(states, symbols)`` of the given length; never emits the UNSEEN column."""
    rng = np.random.default_rng(rng)
    B = model.B[:, :-1] / model.B[:, :-1].sum(axis=1, keepdims=True)
    states = np.empty(length, dtype=np.int64)
    symbols = np.empty(length, dtype=np.int32)
    s = rng.choice(model.n_states, p=model.pi)
    for t in range(length):
        if t:
            s = rng.choice(model.n_states, p=model.A[s])
        states[t] = s
        symbols[t] = rng.choice(B.shape[1], p=B[s])
    return states, symbols


# -- serialization -------------------------------------------------------------

def _fmt_row(row):
    return " ".join(repr(float(v)) for v in row)


def dumps_hmm(model: HmmModel) -> str:
    S, V = model.B.shape
    lines = [f"hmm {S} {V}", "pi", _fmt_row(model.pi), "A"]
    lines += [_fmt_row(r) for r in model.A]
    lines.append("B")
    lines += [_fmt_row(r) for r in model.B]
    return "\n".join(lines) + "\n"


def loads_hmm(text: str) -> HmmModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if head[0] != "hmm" or len(head) != 3:
        raise ValueError("not an HMM model file")
    S, V = int(head[1]), int(head[2])

    def block(name, start, rows):
        if lines[start].strip() != name:
            raise ValueError(f"expected section {name!r}")
        return np.array([[float(v) for v in lines[start + 1 + r].split()]
                         for r in range(rows)]), start + 1 + rows

    pi, pos = block("pi", 1, 1)
    A, pos = block("A", pos, S)
    B, pos = block("B", pos, S)
    if pi.shape != (1, S) or A.shape != (S, S) or B.shape != (S, V):
        raise ValueError("inconsistent matrix dimensions")
    return HmmModel(pi[0], A, B)


def save_hmm(model: HmmModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_hmm(model))


def load_hmm(path) -> HmmModel:
    with open(path, encoding="utf-8") as fh:
        return loads_hmm(fh.read())

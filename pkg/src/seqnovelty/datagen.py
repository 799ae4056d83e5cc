"""Synthetic labeled datasets sampled from a pair of Markov chains.

Nominal sequences come from a chain whose transition matrix has i.i.d.
Uniform(0, 1) entries; anomalies come from a second such matrix with the
identity added, which favors self-transitions. Both are row-normalized and
start from a uniform initial distribution.

Random streams are numpy ``PCG64`` generators derived from one integer seed
through ``SeedSequence`` spawn keys, so each chain, split and sequence index
owns an independent substream:

====================  ===========================
stream                spawn key
====================  ===========================
nominal chain         ``(0,)``
anomaly chain         ``(1,)``
label order           ``(2, split)``
sequence ``i``        ``(3, split, i)``
====================  ===========================

``split`` is 0 for train and 1 for test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seqcore import LabeledDataset, SymbolTable

_MIN_ENTRY = 1e-12


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class MarkovChain:
    initial: np.ndarray
    transition: np.ndarray

    @property
    def sigma(self) -> int:
        return self.initial.shape[0]


@dataclass(frozen=True)
class GeneratorSpec:
    sigma: int = 10
    n_sequences: int = 500
    seq_len: int = 50
    anomaly_prop: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 2:
            raise ValueError("sigma must be >= 2")
        if self.n_sequences < 1:
            raise ValueError("n_sequences must be >= 1")
        if self.seq_len < 1:
            raise ValueError("seq_len must be >= 1")
        if not 0.0 <= self.anomaly_prop < 1.0:
            raise ValueError("anomaly_prop must lie in [0, 1)")

    @property
    def n_anomalies(self) -> int:
        return int(np.floor(self.anomaly_prop * self.n_sequences + 0.5))


def _chain(sigma, rng, diagonal):
    if sigma < 2:
        raise ValueError("sigma must be >= 2")
    T = rng.random((sigma, sigma))
    np.maximum(T, _MIN_ENTRY, out=T)
    T += diagonal * np.eye(sigma)
    T /= T.sum(axis=1, keepdims=True)
    return MarkovChain(np.full(sigma, 1.0 / sigma), T)


def nominal_chain(sigma: int, seed: int) -> MarkovChain:
    return _chain(sigma, substream(seed, 0), 0.0)


def anomaly_chain(sigma: int, seed: int) -> MarkovChain:
    return _chain(sigma, substream(seed, 1), 1.0)


def _draw(cum, u):
    # index of the first cumulative entry exceeding u; guards float round-off
    return min(int(np.searchsorted(cum, u, side="right")), cum.shape[0] - 1)


def sample_sequence(chain: MarkovChain, length: int, rng) -> np.ndarray:
    """Sample ``length`` symbols: the first from ``initial``, then by transitions."""
    if length < 1:
        raise ValueError("length must be >= 1")
    cum0 = np.cumsum(chain.initial)
    cum = np.cumsum(chain.transition, axis=1)
    u = rng.random(length)
    out = np.empty(length, dtype=np.int32)
    s = _draw(cum0, u[0])
    out[0] = s
    for t in range(1, length):
        s = _draw(cum[s], u[t])
        out[t] = s
    return out


def symbol_table(sigma: int) -> SymbolTable:
    return SymbolTable(f"e{i}" for i in range(sigma)).freeze()


def _split(spec, split, chains, table):
    n, n_anom = spec.n_sequences, spec.n_anomalies
    labels = np.zeros(n, dtype=np.int8)
    labels[:n_anom] = 1
    labels = substream(spec.seed, 2, split).permutation(labels)
    seqs = [sample_sequence(chains[labels[i]], spec.seq_len, substream(spec.seed, 3, split, i))
            for i in range(n)]
    meta = {"generator": "markov", "split": "train" if split == 0 else "test",
            "sigma": spec.sigma, "n_sequences": n, "seq_len": spec.seq_len,
            "anomaly_prop": spec.anomaly_prop, "seed": spec.seed}
    return LabeledDataset(seqs, labels, table, meta)


def generate_datasets(spec: GeneratorSpec):
    """Return ``(train, test)`` sharing one symbol table and one chain pair."""
    if spec.n_anomalies >= spec.n_sequences:
        raise ValueError("anomaly proportion leaves no nominal sequences")
    chains = (nominal_chain(spec.sigma, spec.seed), anomaly_chain(spec.sigma, spec.seed))
    table = symbol_table(spec.sigma)
    return _split(spec, 0, chains, table), _split(spec, 1, chains, table)


def log_likelihood_ratio(seq, nominal: MarkovChain, anomaly: MarkovChain) -> float:
    """Per-symbol ``log P(seq | anomaly) - log P(seq | nominal)``."""
    seq = np.asarray(seq)
    a = np.log(anomaly.initial[seq[0]]) - np.log(nominal.initial[seq[0]])
    a += np.sum(np.log(anomaly.transition[seq[:-1], seq[1:]])
                - np.log(nominal.transition[seq[:-1], seq[1:]]))
    return float(a / len(seq))


def write_metadata(spec: GeneratorSpec, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in ("sigma", "n_sequences", "seq_len", "anomaly_prop", "seed"):
            fh.write(f"{key}={getattr(spec, key)}\n")
        fh.write(f"n_anomalies={spec.n_anomalies}\n")
        fh.write("rng=numpy.PCG64/SeedSequence\n")

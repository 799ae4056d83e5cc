"""Scalability harness: fit/score wall time, peak memory and test AP along
one generator axis (number of sequences, sequence length or anomaly
proportion).

Timeouts are cooperative: a phase that ran longer than ``timeout_s`` marks
its record as timed out, and larger axis points for that detector are
emitted as skipped (``timed_out=True``, ``n_runs=0``) without running.
"""

from __future__ import annotations

import csv
import enum
import logging
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .datagen import GeneratorSpec, generate_datasets
from .evaluation import average_precision
from .seqcore import ANOMALY, NOMINAL

try:
    import psutil
except ImportError:  # pragma: no cover
    psutil = None

log = logging.getLogger(__name__)

CSV_FIELDS = ("algorithm", "axis", "value", "fit_time_s", "score_time_s",
              "peak_mem_bytes", "map", "n_runs", "timed_out")

DEFAULT_TIMEOUT_S = 600.0


# -- memory ----------------------------------------------------------------------

def _rss():
    if psutil is None:
        return None
    try:
        return psutil.Process().memory_info().rss
    except Exception:  # pragma: no cover - platform specific
        return None


class MemorySampler:
    """Track the peak resident set size above the value seen on entry.

    A daemon thread samples every ``interval`` seconds. ``peak`` is ``None``
    when the platform exposes no RSS.
    """

    def __init__(self, interval: float = 0.01):
        self.interval = interval
        self.baseline = None
        self._max = None
        self._stop = threading.Event()
        self._thread = None

    def _sample(self):
        v = _rss()
        if v is not None and (self._max is None or v > self._max):
            self._max = v

    def _run(self):
        while not self._stop.wait(self.interval):
            self._sample()

    def __enter__(self):
        self.baseline = _rss()
        self._max = self.baseline
        if self.baseline is not None:
            self._thread = threading.Thread(target=self._run, daemon=True)
            self._thread.start()
        return self

    def __exit__(self, *exc):
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._sample()
        return False

    @property
    def peak(self):
        if self.baseline is None or self._max is None:
            return None
        return max(0, self._max - self.baseline)


def measure_peak_memory(action, interval: float = 0.01):
    """Peak RSS growth in bytes while ``action()`` runs, or ``None`` if unknown."""
    with MemorySampler(interval) as sampler:
        action()
    return sampler.peak


# -- axes -------------------------------------------------------------------------

class AxisKind(str, enum.Enum):
    NUM_SAMPLES = "samples"
    SEQ_LENGTH = "length"
    ANOMALY_PROPORTION = "proportion"

    @property
    def param(self) -> str:
        return {"samples": "n_sequences", "length": "seq_len",
                "proportion": "anomaly_prop"}[self.value]


_DEFAULT_FIXED = {"n_sequences": 500, "seq_len": 20, "anomaly_prop": 0.1, "sigma": 10}


@dataclass
class BenchAxis:
    """Ordered axis points plus the constant generator parameters.

    ``companions`` maps another generator parameter to one value per axis
    point, e.g. ``n_sequences`` scaled along a length axis.
    """

    kind: AxisKind
    values: list
    fixed: dict = field(default_factory=dict)
    companions: dict = field(default_factory=dict)

    def __post_init__(self):
        self.kind = AxisKind(self.kind)
        self.values = list(self.values)
        if len(self.values) < 2:
            raise ValueError("an axis needs at least two points")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("axis values must be strictly increasing")
        for key, vals in self.companions.items():
            if len(vals) != len(self.values):
                raise ValueError(f"companion {key!r} needs one value per axis point")
        self.fixed = {**_DEFAULT_FIXED, **self.fixed}

    @property
    def positive_class(self) -> int:
        # along the contamination axis the nominal class is the positive one,
        # which keeps AP defined at proportion 0
        return NOMINAL if self.kind is AxisKind.ANOMALY_PROPORTION else ANOMALY

    def params_at(self, i: int) -> dict:
        p = dict(self.fixed)
        p[self.kind.param] = self.values[i]
        for key, vals in self.companions.items():
            p[key] = vals[i]
        return p


PRESET_SAMPLES = (100, 200, 500, 1000, 2000, 5000)
PRESET_LENGTHS = (20, 50, 100, 250, 500, 1000)
PRESET_PROPORTIONS = (0.0, 0.05, 0.1, 0.2, 0.3, 0.4)


def preset_axis(kind) -> BenchAxis:
    """Desk-scale presets; length points hold ``N * L`` equal to the
    corresponding point of the samples preset (at ``L = 20``)."""
    kind = AxisKind(kind)
    if kind is AxisKind.NUM_SAMPLES:
        return BenchAxis(kind, PRESET_SAMPLES, {"seq_len": 20})
    if kind is AxisKind.SEQ_LENGTH:
        ns = [int(round(n * 20 / L)) for n, L in zip(PRESET_SAMPLES, PRESET_LENGTHS)]
        return BenchAxis(kind, PRESET_LENGTHS, {}, {"n_sequences": ns})
    return BenchAxis(kind, PRESET_PROPORTIONS, {"n_sequences": 500, "seq_len": 20})


# -- records ----------------------------------------------------------------------

@dataclass
class BenchRecord:
    algorithm: str
    axis: str
    value: float
    fit_time_s: float = 0.0
    score_time_s: float = 0.0
    peak_mem_bytes: float | None = None
    map: float | None = None
    n_runs: int = 0
    timed_out: bool = False
    error: str | None = None

    def row(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "axis": self.axis,
            "value": self.value,
            "fit_time_s": f"{self.fit_time_s:.6f}",
            "score_time_s": f"{self.score_time_s:.6f}",
            "peak_mem_bytes": "" if self.peak_mem_bytes is None else int(round(self.peak_mem_bytes)),
            "map": "" if self.map is None else repr(float(self.map)),
            "n_runs": self.n_runs,
            "timed_out": str(self.timed_out).lower(),
        }


def write_bench_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())


def format_table(records) -> str:
    head = f"{'algorithm':<14}{'axis':<11}{'value':>8}{'fit_s':>11}{'score_s':>11}" \
           f"{'peak_MiB':>10}{'map':>8}{'runs':>5}  status"
    lines = [head, "-" * len(head)]
    for r in records:
        mem = "-" if r.peak_mem_bytes is None else f"{r.peak_mem_bytes / 2**20:.1f}"
        ap = "-" if r.map is None else f"{r.map:.3f}"
        status = "error" if r.error else ("timeout" if r.timed_out else "ok")
        lines.append(f"{r.algorithm:<14}{r.axis:<11}{r.value:>8g}{r.fit_time_s:>11.4f}"
                     f"{r.score_time_s:>11.4f}{mem:>10}{ap:>8}{r.n_runs:>5}  {status}")
    return "\n".join(lines) + "\n"


# -- runner -----------------------------------------------------------------------

def _run_seed(seed, point, run):
    return int(np.random.SeedSequence(seed, spawn_key=(point, run)).generate_state(1)[0])


def _timed(fn, memory, interval):
    if not memory:
        t0 = time.perf_counter()
        out = fn()
        return out, time.perf_counter() - t0, None
    with MemorySampler(interval) as sampler:
        t0 = time.perf_counter()
        out = fn()
        elapsed = time.perf_counter() - t0
    return out, elapsed, sampler.peak


def _name(det):
    return getattr(det, "name", type(det).__name__)


def run_axis(axis: BenchAxis, detectors, timeout_s: float = DEFAULT_TIMEOUT_S,
             seed: int = 0, n_runs: int = 3, warmup: bool = True,
             memory: bool = True, interval: float = 0.01):
    """Benchmark each detector at each axis point over ``n_runs`` datasets.

    Dataset generation happens outside the timed sections. Each run fits on
    a fresh training set and scores the matching test set; times, peak
    memory and AP are averaged over completed runs.
    """
    points = []
    for i in range(len(axis.values)):
        runs = []
        for r in range(n_runs):
            params = axis.params_at(i)
            try:
                spec = GeneratorSpec(sigma=int(params["sigma"]),
                                     n_sequences=int(params["n_sequences"]),
                                     seq_len=int(params["seq_len"]),
                                     anomaly_prop=float(params["anomaly_prop"]),
                                     seed=_run_seed(seed, i, r))
                runs.append(generate_datasets(spec))
            except Exception as exc:
                raise RuntimeError(f"dataset generation failed at {axis.kind.value}="
                                   f"{axis.values[i]} run {r}: {exc}") from exc
        points.append(runs)

    records = []
    for det in detectors:
        name = _name(det)
        stop = False
        for i, value in enumerate(axis.values):
            rec = BenchRecord(name, axis.kind.value, value)
            records.append(rec)
            if stop:
                rec.timed_out = True
                continue
            try:
                _measure_point(rec, det, points[i], axis.positive_class, timeout_s,
                               warmup, memory, interval)
            except Exception as exc:
                rec.error = f"{type(exc).__name__}: {exc}"
                rec.map = None
                log.warning("%s failed at %s=%s: %s", name, axis.kind.value, value, exc)
            if rec.timed_out:
                stop = True
    return records


def _measure_point(rec, det, runs, positive, timeout_s, warmup, memory, interval):
    fits, scores, mems, aps = [], [], [], []

    def finish():
        rec.n_runs = len(fits)
        rec.fit_time_s = float(np.mean(fits)) if fits else 0.0
        rec.score_time_s = float(np.mean(scores)) if scores else 0.0
        known = [m for m in mems if m is not None]
        rec.peak_mem_bytes = float(np.mean(known)) if known else None
        rec.map = float(np.mean(aps)) if aps and not rec.timed_out else None

    if warmup:
        train, test = runs[0]
        model, t_fit, _ = _timed(lambda: det.fit(train.sequences), False, interval)
        if t_fit > timeout_s:
            rec.timed_out = True
            fits.append(t_fit)
            return finish()
        _, t_score, _ = _timed(lambda: model.score(test.sequences), False, interval)
        if t_score > timeout_s:
            rec.timed_out = True
            fits.append(t_fit)
            scores.append(t_score)
            return finish()

    for train, test in runs:
        model, t_fit, m_fit = _timed(lambda: det.fit(train.sequences), memory, interval)
        fits.append(t_fit)
        if t_fit > timeout_s:
            rec.timed_out = True
            mems.append(m_fit)
            break
        s, t_score, m_score = _timed(lambda: model.score(test.sequences), memory, interval)
        scores.append(t_score)
        mems.append(None if m_fit is None or m_score is None else max(m_fit, m_score))
        if t_score > timeout_s:
            rec.timed_out = True
            break
        aps.append(average_precision(s, test.labels, positive=positive))
        model = None  # release before the next run is measured
    finish()

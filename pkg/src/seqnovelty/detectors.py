"""Named detector configurations with uniform ``fit`` / ``score`` behavior.

Defaults: HMM with 3 components, 30 iterations and tolerance 1e-2; kNN with
``k = max(0.1 n, 20)``; LOF with ``k = max(0.1 n, 50)``; k-medoids with 2
medoids; t-STIDE with windows of 6 and frequency threshold 1e-5.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .hmm import HmmTrainConfig, hmm_fit
from .neighbors import kmedoids_fit, knn_fit, lof_fit
from .window import stide_fit

DETECTOR_NAMES = ("hmm", "knn-lcs", "knn-lev", "lof-lcs", "lof-lev",
                  "kmedoids-lcs", "kmedoids-lev", "t-stide")

_ALLOWED = {
    "hmm": {"components", "iters", "tol", "seed"},
    "knn": {"k"},
    "lof": {"k"},
    "kmedoids": {"k", "seed", "iters"},
    "t-stide": {"window", "threshold"},
}
_TYPES = {"k": int, "components": int, "iters": int, "seed": int, "window": int,
          "tol": float, "threshold": float}


def _family(name):
    return name.split("-")[0] if name != "t-stide" else name


@dataclass(frozen=True)
class DetectorSpec:
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in DETECTOR_NAMES:
            raise ValueError(f"unknown detector {self.name!r}; "
                             f"choose from {', '.join(DETECTOR_NAMES)}")
        allowed = _ALLOWED[_family(self.name)]
        clean = {}
        for key, value in self.params.items():
            if value is None:
                continue
            if key not in allowed:
                raise ValueError(f"parameter {key!r} does not apply to {self.name}")
            try:
                clean[key] = _TYPES[key](value)
            except (TypeError, ValueError):
                raise ValueError(f"parameter {key!r} expects {_TYPES[key].__name__}, "
                                 f"got {value!r}") from None
        object.__setattr__(self, "params", clean)

    @property
    def metric(self):
        return self.name.split("-")[1] if "-" in self.name and self.name != "t-stide" else None

    def fit(self, train):
        p = self.params
        family = _family(self.name)
        if family == "hmm":
            cfg = HmmTrainConfig(components=p.get("components", 3),
                                 max_iters=p.get("iters", 30),
                                 tol=p.get("tol", 1e-2),
                                 seed=p.get("seed", 0))
            return hmm_fit(train, cfg)
        if family == "knn":
            return knn_fit(train, self.metric, k=p.get("k"))
        if family == "lof":
            return lof_fit(train, self.metric, k=p.get("k"))
        if family == "kmedoids":
            return kmedoids_fit(train, self.metric, k=p.get("k", 2),
                                max_iters=p.get("iters", 100), seed=p.get("seed", 0))
        return stide_fit(train, window_len=p.get("window", 6),
                         threshold=p.get("threshold", 1e-5))

    def __str__(self):
        return self.name


def parse_detectors(text: str, **overrides):
    """Comma-separated names (or ``all``) to a list of :class:`DetectorSpec`.

    Overrides that do not apply to a detector family are dropped for it.
    """
    names = DETECTOR_NAMES if text.strip() == "all" else [
        n.strip() for n in text.split(",") if n.strip()]
    if not names:
        raise ValueError("no detector given")
    out = []
    for name in names:
        if name not in DETECTOR_NAMES:
            raise ValueError(f"unknown detector {name!r}; "
                             f"choose from {', '.join(DETECTOR_NAMES)}")
        allowed = _ALLOWED[_family(name)]
        out.append(DetectorSpec(name, {k: v for k, v in overrides.items() if k in allowed}))
    return out

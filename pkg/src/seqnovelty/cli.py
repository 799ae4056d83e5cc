"""Command-line front end: ``generate``, ``eval``, ``score`` and ``bench``.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .datagen import GeneratorSpec, generate_datasets, write_metadata
from .detectors import DETECTOR_NAMES, parse_detectors
from .evaluation import (EvalReport, evaluate_split, cross_validated_map,
                         format_friedman, friedman_test, pairwise_vs_best,
                         rank_summary, write_fold_csv, write_summary_csv)
from .seqcore import load_dataset, split_train_test, write_dataset

log = logging.getLogger("seqnovelty")


class CliError(Exception):
    """Runtime failure reported with exit code 1."""


# -- helpers ---------------------------------------------------------------------

def _probability(text):
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {v}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _add_overrides(p):
    g = p.add_argument_group("detector parameters")
    g.add_argument("--k", type=_positive_int, help="neighbors (kNN, LOF) or medoids")
    g.add_argument("--window", type=_positive_int, help="t-STIDE window length")
    g.add_argument("--threshold", type=float, help="t-STIDE frequency threshold")
    g.add_argument("--components", type=_positive_int, help="HMM hidden states")
    g.add_argument("--iters", type=_positive_int, help="HMM / k-medoids iterations")
    g.add_argument("--tol", type=float, help="HMM convergence tolerance")


def _detectors(parser, args, text):
    overrides = {k: getattr(args, k) for k in
                 ("k", "window", "threshold", "components", "iters", "tol")}
    overrides["seed"] = args.seed
    try:
        return parse_detectors(text, **overrides)
    except ValueError as exc:
        parser.error(str(exc))


def _dataset_id(path):
    return Path(path).stem


# -- generate --------------------------------------------------------------------

def cmd_generate(args, parser):
    try:
        spec = GeneratorSpec(sigma=args.sigma, n_sequences=args.n, seq_len=args.len,
                             anomaly_prop=args.prop, seed=args.seed)
        if spec.n_anomalies >= spec.n_sequences:
            raise ValueError("anomaly proportion leaves no nominal sequences")
    except ValueError as exc:
        parser.error(str(exc))
    train, test = generate_datasets(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset(train, out / "train.tsv")
    write_dataset(test, out / "test.tsv")
    write_metadata(spec, out / "meta.txt")
    print(f"wrote {len(train)} train and {len(test)} test sequences to {out}")
    return 0


# -- eval ------------------------------------------------------------------------

def _eval_dataset(detectors, args, name, ds=None, train=None, test=None):
    reports = []
    for det in detectors:
        if ds is not None and args.split is None:
            try:
                rep = cross_validated_map(det, ds, folds=args.folds, seed=args.seed,
                                          dataset_id=name)
            except Exception as exc:
                raise CliError(f"{name}: {exc}") from exc
        else:
            if ds is not None:
                train, test = split_train_test(ds, args.split, args.seed)
            rep = EvalReport(det.name, name)
            try:
                rep.fold_ap.append(evaluate_split(det, train, test))
            except Exception as exc:
                raise CliError(f"{name}: {det.name} failed on fold 0: {exc}") from exc
        print(f"{name}\t{rep.detector}\tMAP = {rep.map:.4f} +/- {rep.std:.4f}")
        reports.append(rep)
    return reports


def cmd_eval(args, parser):
    if args.folds < 2:
        parser.error("--folds must be >= 2")
    if args.split is not None and not 0.0 < args.split < 1.0:
        parser.error("--split must lie in (0, 1)")
    fixed = args.train is not None or args.test is not None
    if fixed and (args.train is None or args.test is None):
        parser.error("--train and --test must be given together")
    if fixed == bool(args.data):
        parser.error("give either --data (one or more) or --train/--test")
    detectors = _detectors(parser, args, args.detector)

    reports = []
    try:
        if fixed:
            train = load_dataset(args.train)
            test = load_dataset(args.test, table=train.table)
            reports += _eval_dataset(detectors, args, _dataset_id(args.test),
                                     train=train, test=test)
        else:
            for path in args.data:
                reports += _eval_dataset(detectors, args, _dataset_id(path),
                                         ds=load_dataset(path))
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc

    blocks = _friedman_blocks(reports)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_fold_csv(reports, out / "folds.csv")
    write_summary_csv(reports, out / "summary.csv")
    if blocks:
        (out / "friedman.txt").write_text("".join(blocks), encoding="utf-8")
        sys.stdout.write("".join(blocks))
    return 0


def _friedman_blocks(reports):
    by_dataset = {}
    for r in reports:
        by_dataset.setdefault(r.dataset, []).append(r)
    blocks = []
    for name, reps in by_dataset.items():
        n_folds = len(reps[0].fold_ap)
        if len(reps) < 2 or n_folds < 2:
            continue
        X = np.array([r.fold_ap for r in reps]).T
        algs = [r.detector for r in reps]
        blocks.append(format_friedman(friedman_test(X), algs, title=f"friedman {name} (folds)",
                                      pairwise=pairwise_vs_best(X)))
    if len(by_dataset) >= 2:
        algs = [r.detector for r in next(iter(by_dataset.values()))]
        X = np.array([[next(r.map for r in reps if r.detector == a) for a in algs]
                      for reps in by_dataset.values()])
        if X.shape[1] >= 2:
            blocks.append(format_friedman(friedman_test(X), algs, title="friedman datasets",
                                          pairwise=pairwise_vs_best(X)))
        lines = ["[rank summary]"] + [f"  {a} {r:.4f}" for a, r in rank_summary(reports)]
        blocks.append("\n".join(lines) + "\n")
    return blocks


# -- score -----------------------------------------------------------------------

def cmd_score(args, parser):
    dets = _detectors(parser, args, args.detector)
    if len(dets) != 1:
        parser.error("score takes a single detector")
    det = dets[0]
    try:
        train = load_dataset(args.train)
        test = load_dataset(args.test, table=train.table)
        scores = det.fit(train.sequences).score(test.sequences)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    text = "".join(f"{i}\t{float(s)!r}\n" for i, s in enumerate(scores))
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


# -- bench -----------------------------------------------------------------------

def _load_config(path, parser):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        parser.error("config must be a JSON object")
    return cfg


def cmd_bench(args, parser):
    cfg = _load_config(args.config, parser) if args.config else {}
    kind = args.axis or cfg.get("axis") or "samples"
    try:
        kind = bench_mod.AxisKind(kind)
    except ValueError:
        parser.error(f"unknown axis {kind!r}")
    preset = bench_mod.preset_axis(kind)
    fixed = {k: v for k, v in preset.fixed.items()}
    fixed.update(cfg.get("fixed", {}))
    for key, attr in (("sigma", "sigma"), ("n_sequences", "n"), ("seq_len", "len"),
                      ("anomaly_prop", "prop")):
        if getattr(args, attr) is not None:
            fixed[key] = getattr(args, attr)
    if args.points:
        conv = float if kind is bench_mod.AxisKind.ANOMALY_PROPORTION else int
        try:
            values = [conv(v) for v in args.points.split(",") if v.strip()]
        except ValueError:
            parser.error(f"bad --points {args.points!r}")
        companions = {}
    else:
        values = cfg.get("values", preset.values)
        companions = cfg.get("companions", preset.companions if "values" not in cfg else {})
    try:
        axis = bench_mod.BenchAxis(kind, values, fixed, companions)
    except ValueError as exc:
        parser.error(str(exc))
    detectors = _detectors(parser, args, args.detectors or cfg.get("detectors", "all"))
    timeout = args.timeout if args.timeout is not None else float(
        cfg.get("timeout", bench_mod.DEFAULT_TIMEOUT_S))
    runs = args.runs if args.runs is not None else int(cfg.get("runs", 3))
    try:
        records = bench_mod.run_axis(axis, detectors, timeout_s=timeout, seed=args.seed,
                                     n_runs=runs, warmup=not args.no_warmup)
    except RuntimeError as exc:
        raise CliError(str(exc)) from exc
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    bench_mod.write_bench_csv(records, out)
    sys.stdout.write(bench_mod.format_table(records))
    for r in records:
        if r.error:
            print(f"error: {r.algorithm} at {r.axis}={r.value}: {r.error}", file=sys.stderr)
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="seqnovelty",
                                     description="Novelty detection for discrete sequences.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample train/test datasets from Markov chains")
    g.add_argument("--sigma", type=int, default=10, help="alphabet size")
    g.add_argument("--n", type=_positive_int, default=500, help="sequences per split")
    g.add_argument("--len", type=_positive_int, default=50, help="sequence length")
    g.add_argument("--prop", type=_probability, default=0.1, help="anomaly proportion")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("eval", help="cross-validated MAP of one or more detectors")
    e.add_argument("--detector", default="all",
                   help=f"comma-separated names or 'all' ({', '.join(DETECTOR_NAMES)})")
    e.add_argument("--data", action="append", default=[], help="dataset file (repeatable)")
    e.add_argument("--train", help="fixed training file")
    e.add_argument("--test", help="fixed test file")
    e.add_argument("--split", type=float, help="single stratified split ratio instead of folds")
    e.add_argument("--folds", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out", default="eval_out", help="output directory")
    _add_overrides(e)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("score", help="fit on a training file and score a test file")
    s.add_argument("--detector", required=True)
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--out", help="scores file (default: stdout)")
    s.add_argument("--seed", type=int, default=0)
    _add_overrides(s)
    s.set_defaults(func=cmd_score)

    b = sub.add_parser("bench", help="time / memory / MAP along a generator axis")
    b.add_argument("--axis", choices=[a.value for a in bench_mod.AxisKind])
    b.add_argument("--points", help="comma-separated axis values (default: preset)")
    b.add_argument("--detectors", help="comma-separated names or 'all'")
    b.add_argument("--timeout", type=float, help="seconds per fit or score phase")
    b.add_argument("--runs", type=_positive_int, help="datasets per point (default 3)")
    b.add_argument("--no-warmup", action="store_true")
    b.add_argument("--sigma", type=int)
    b.add_argument("--n", type=_positive_int)
    b.add_argument("--len", type=_positive_int)
    b.add_argument("--prop", type=_probability)
    b.add_argument("--config", help="JSON file with axis/values/fixed/detectors/timeout")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="bench.csv")
    _add_overrides(b)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, parser)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

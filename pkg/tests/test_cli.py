import csv

import numpy as np
import pytest

from seqnovelty.cli import main
from seqnovelty.detectors import DetectorSpec
from seqnovelty.seqcore import load_dataset


def run(argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def generate(out, n=60, length=12, seed=7, sigma=5):
    assert run(["generate", "--sigma", sigma, "--n", n, "--len", length, "--prop", 0.1,
                "--seed", seed, "--out", out]) == 0
    return out


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_generate_writes_files_deterministically(tmp_path):
    a = generate(tmp_path / "a")
    b = generate(tmp_path / "b")
    for name in ("train.tsv", "test.tsv", "meta.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert len((a / "train.tsv").read_text().splitlines()) == 60
    before = (a / "train.tsv").read_bytes()
    generate(tmp_path / "a")
    assert (a / "train.tsv").read_bytes() == before


@pytest.mark.parametrize("bad", [["--prop", "1.0"], ["--sigma", "1"], ["--n", "0"],
                                 ["--n", "2", "--prop", "0.9"]])
def test_generate_usage_errors(tmp_path, bad):
    assert run(["generate", "--out", tmp_path / "x", *bad]) == 2


def test_eval_toy_file(tmp_path, capsys):
    toy = tmp_path / "toy.tsv"
    lines = [f"0\ta b c a b c a b {'c' if i % 2 else 'a'}" for i in range(12)]
    lines += ["1\tz z q z z q", "1\tq q q z", "1\tz q z q z"]
    toy.write_text("\n".join(lines) + "\n")
    out = tmp_path / "ev"
    assert run(["eval", "--detector", "t-stide", "--data", toy, "--folds", 3,
                "--window", 3, "--out", out]) == 0
    folds = rows(out / "folds.csv")
    assert len(folds) == 3
    assert all(0 <= float(r["ap"]) <= 1 for r in folds)
    assert "MAP = " in capsys.readouterr().out


def test_eval_usage_errors(tmp_path):
    d = generate(tmp_path / "d", n=20, length=6)
    assert run(["eval", "--data", d / "train.tsv", "--folds", 1]) == 2
    assert run(["eval", "--data", d / "train.tsv", "--detector", "nosuch"]) == 2
    assert run(["eval", "--train", d / "train.tsv"]) == 2
    assert run(["eval"]) == 2
    assert run(["eval", "--data", tmp_path / "missing.tsv", "--out", tmp_path / "o"]) == 1


def test_eval_full_sweep(tmp_path, capsys):
    d = generate(tmp_path / "d", n=50, length=10)
    out = tmp_path / "ev"
    assert run(["eval", "--detector", "all", "--data", d / "train.tsv", "--folds", 3,
                "--seed", 1, "--out", out]) == 0
    summary = rows(out / "summary.csv")
    assert len(summary) == 8
    assert {r["algorithm"] for r in summary} == set(
        ["hmm", "knn-lcs", "knn-lev", "lof-lcs", "lof-lev", "kmedoids-lcs", "kmedoids-lev",
         "t-stide"])
    assert len(rows(out / "folds.csv")) == 24
    text = (out / "friedman.txt").read_text()
    assert "statistic = " in text and "p_value = " in text and "best = " in text


def test_eval_fixed_split_and_multi_dataset(tmp_path):
    d1 = generate(tmp_path / "d1", n=40, length=8, seed=1)
    d2 = generate(tmp_path / "d2", n=40, length=8, seed=2)
    out = tmp_path / "fixed"
    assert run(["eval", "--detector", "t-stide,knn-lev", "--train", d1 / "train.tsv",
                "--test", d1 / "test.tsv", "--out", out]) == 0
    assert len(rows(out / "folds.csv")) == 2
    out2 = tmp_path / "multi"
    assert run(["eval", "--detector", "t-stide,knn-lev", "--data", d1 / "train.tsv",
                "--data", d2 / "test.tsv", "--folds", 2, "--out", out2]) == 0
    text = (out2 / "friedman.txt").read_text()
    assert "[friedman datasets]" in text and "[rank summary]" in text


def test_score_duplicate_is_zero(tmp_path):
    d = generate(tmp_path / "d", n=30, length=10)
    out = tmp_path / "scores.tsv"
    assert run(["score", "--detector", "t-stide", "--threshold", 0, "--train", d / "train.tsv",
                "--test", d / "train.tsv", "--out", out]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 30
    assert all(line.split("\t")[1] == "0.0" for line in lines)


@pytest.mark.parametrize("name", ["hmm", "knn-lev", "lof-lcs", "kmedoids-lev", "t-stide"])
def test_score_matches_library(tmp_path, name):
    d = generate(tmp_path / "d", n=30, length=10)
    out = tmp_path / "s.tsv"
    assert run(["score", "--detector", name, "--train", d / "train.tsv", "--test",
                d / "test.tsv", "--seed", 3, "--out", out]) == 0
    train = load_dataset(d / "train.tsv")
    test = load_dataset(d / "test.tsv", table=train.table)
    params = {"seed": 3} if name in ("hmm", "kmedoids-lev") else {}
    want = DetectorSpec(name, params).fit(train.sequences).score(test.sequences)
    got = [float(line.split("\t")[1]) for line in out.read_text().splitlines()]
    assert np.array_equal(np.array(got), want)


def test_score_rejects_multiple(tmp_path):
    d = generate(tmp_path / "d", n=10, length=4)
    assert run(["score", "--detector", "hmm,t-stide", "--train", d / "train.tsv",
                "--test", d / "test.tsv"]) == 2


def test_bench_points(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run(["bench", "--axis", "samples", "--points", "100,200", "--detectors",
                "t-stide", "--runs", 1, "--out", out]) == 0
    assert len(rows(out)) == 2
    assert "t-stide" in capsys.readouterr().out


def test_bench_usage_errors(tmp_path):
    assert run(["bench", "--detectors", "nosuch", "--out", tmp_path / "b.csv"]) == 2
    assert run(["bench", "--points", "200,100", "--out", tmp_path / "b.csv"]) == 2


def test_bench_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"axis": "length", "values": [5, 10], "fixed": {"n_sequences": 20},'
                   ' "detectors": "t-stide", "runs": 1}')
    out = tmp_path / "b.csv"
    assert run(["bench", "--config", cfg, "--out", out]) == 0
    got = rows(out)
    assert [r["value"] for r in got] == ["5", "10"] and got[0]["axis"] == "length"


def test_detector_spec_validation():
    with pytest.raises(ValueError):
        DetectorSpec("nosuch")
    with pytest.raises(ValueError):
        DetectorSpec("t-stide", {"k": 3})
    with pytest.raises(ValueError):
        DetectorSpec("knn-lcs", {"k": "many"})
    assert DetectorSpec("knn-lcs", {"k": "3"}).params == {"k": 3}

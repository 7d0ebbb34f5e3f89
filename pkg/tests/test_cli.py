import csv
import subprocess
import sys

import pytest

from contagionlab.cli import EXIT_NO_HISTORIES, main, read_config
from contagionlab.seeding import SEED_ENV


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def sim(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    args = ["simulate", "--out", str(out), "--n-users", "120", "--mean-followees", "25",
            "--duration-hours", "24", "--post-rate", "1.5", "--beta", "0.5", "--seed", "2"]
    assert main(args) == 0
    return out


def test_simulate_outputs(sim):
    manifest = read_config(sim / "manifest.txt")
    assert manifest["seed"] == "2" and manifest["n_users"] == "120" and manifest["beta"] == "0.5"
    events = (sim / "events.jsonl").read_text().splitlines()
    assert int(manifest["num_events"]) == len(events) > 0
    assert len(rows(sim / "ground_truth.csv")) == len(events) + 1
    assert len(rows(sim / "users_truth.csv")) == 121


def test_analyze_and_rerun_from_manifest(sim, tmp_path):
    base = ["analyze", "--events", str(sim / "events.jsonl"), "--graph", str(sim / "graph.csv")]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    produced = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert produced == sorted([
        "baseline.csv", "overexposure.csv", "valence_bins.csv", "valence_fit.csv",
        "labels.csv", "users.csv", "histogram.csv", "classes.csv", "manifest.txt",
    ])
    assert rows(tmp_path / "a" / "baseline.csv")[0] == ["group", "neg", "neu", "pos", "neg_se", "neu_se", "pos_se"]
    assert main(["analyze", "--config", str(tmp_path / "a" / "manifest.txt"), "--out", str(tmp_path / "b")]) == 0
    for name in produced:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_digest_mismatch(sim, tmp_path, capsys):
    base = ["analyze", "--events", str(sim / "events.jsonl"), "--graph", str(sim / "graph.csv")]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    manifest = tmp_path / "a" / "manifest.txt"
    manifest.write_text(manifest.read_text().replace("events_sha256=", "events_sha256=0"))
    assert main(["analyze", "--config", str(manifest), "--out", str(tmp_path / "b")]) == 1
    assert "mismatch" in capsys.readouterr().err


def test_seed_precedence(sim, tmp_path, monkeypatch):
    base = ["analyze", "--events", str(sim / "events.jsonl"), "--graph", str(sim / "graph.csv")]
    monkeypatch.setenv(SEED_ENV, "11")
    assert main(base + ["--out", str(tmp_path / "env")]) == 0
    assert read_config(tmp_path / "env" / "manifest.txt")["seed"] == "11"
    assert main(base + ["--out", str(tmp_path / "flag"), "--seed", "5"]) == 0
    assert read_config(tmp_path / "flag" / "manifest.txt")["seed"] == "5"
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("seed=8\nmin-stimuli=3\n")
    assert main(base + ["--out", str(tmp_path / "cfg"), "--config", str(cfg)]) == 0
    written = read_config(tmp_path / "cfg" / "manifest.txt")
    assert written["seed"] == "8" and written["min_stimuli"] == "3"


def test_no_qualifying_histories(sim, tmp_path, capsys):
    code = main(["analyze", "--events", str(sim / "events.jsonl"), "--graph", str(sim / "graph.csv"),
                 "--out", str(tmp_path / "a"), "--min-stimuli", "100000"])
    assert code == EXIT_NO_HISTORIES
    assert "no qualifying histories" in capsys.readouterr().err


def test_missing_input(tmp_path, capsys):
    code = main(["analyze", "--events", str(tmp_path / "nope.jsonl"), "--graph", str(tmp_path / "g.csv"),
                 "--out", str(tmp_path / "a")])
    assert code != 0 and "error:" in capsys.readouterr().err


def test_strict_mode(tmp_path):
    events = tmp_path / "e.jsonl"
    events.write_text('{"tweet_id": "1"}\n')
    assert main(["score", "--events", str(events), "--out", str(tmp_path / "s.csv")]) == 0
    assert main(["score", "--events", str(events), "--strict", "--out", str(tmp_path / "t.csv")]) != 0


def test_score(sim, tmp_path):
    out = tmp_path / "scores.csv"
    assert main(["score", "--events", str(sim / "events.jsonl"), "--out", str(out)]) == 0
    got = rows(out)
    truth = rows(sim / "ground_truth.csv")
    assert got[0] == ["tweet_id", "s_pos", "s_neg", "polarity", "class"]
    assert [(r[0], r[4]) for r in got[1:]] == [(r[0], r[2]) for r in truth[1:]]


def test_score_empty_input_and_missing_lexicon(tmp_path):
    events = tmp_path / "e.jsonl"
    events.write_text("")
    assert main(["score", "--events", str(events), "--out", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").read_text() == "tweet_id,s_pos,s_neg,polarity,class\n"
    assert main(["score", "--events", str(events), "--lexicon", str(tmp_path / "none.tsv")]) != 0


def test_zero_duration(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--n-users", "10", "--mean-followees", "3",
                 "--duration-hours", "0"]) == 0
    assert (tmp_path / "events.jsonl").read_text() == ""


def test_heterogeneous_beta_flags(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--n-users", "20", "--mean-followees", "5",
                 "--duration-hours", "1", "--beta-split", "0.5", "--beta-low", "0.2", "--beta-high", "0.7"]) == 0
    betas = [r[1] for r in rows(tmp_path / "users_truth.csv")[1:]]
    assert betas.count("0.7") == 10 and betas.count("0.2") == 10


def test_invalid_config_value(tmp_path, capsys):
    assert main(["simulate", "--out", str(tmp_path), "--beta", "2"]) != 0
    assert "error:" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "contagionlab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "contagionlab" in out.stdout

import json
import os

import numpy as np
import pytest

from spikenav.cli import main
from spikenav.session import load_dataset


def test_stats_prints_reported_values(capsys):
    code = main(["stats", "--mu1", "0.09", "--sd1", "0.035", "--n1", "5",
                 "--mu2", "0.091", "--sd2", "0.034", "--n2", "5"])
    out = capsys.readouterr().out
    assert code == 0
    assert "t=0.046" in out
    assert "p=0.9646" in out


def test_stats_runtime_error_exit_code(capsys):
    code = main(["stats", "--mu1", "0.1", "--sd1", "0", "--n1", "5",
                 "--mu2", "0.2", "--sd2", "0", "--n2", "5"])
    assert code == 2
    assert "degenerate variance" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_flag_is_usage_error(capsys):
    assert main(["stats", "--mu1", "1", "--nope", "2"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_gen_writes_sessions_and_manifest(tmp_path, capsys):
    out = tmp_path / "data"
    code = main(["gen", "--scenarios", "2", "--per", "2", "--seed", "7",
                 "--out", str(out), "--max-frames", "30"])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["sessions"]) == 4
    sessions = load_dataset(out)
    assert len(sessions) == 4
    assert {s.id.rsplit("_", 1)[0] for s in sessions} == \
           {"straight_narrow", "straight_wide"}


def test_seed_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("SPIKENAV_SEED", "13")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert main(["gen", "--scenarios", "1", "--per", "1",
                 "--out", str(out_a), "--max-frames", "20"]) == 0
    assert main(["gen", "--scenarios", "1", "--per", "1", "--seed", "13",
                 "--out", str(out_b), "--max-frames", "20"]) == 0
    a = (out_a / "straight_narrow_00" / "scan.csv").read_bytes()
    b = (out_b / "straight_narrow_00" / "scan.csv").read_bytes()
    assert a == b


def test_rasterize_session(tmp_path, capsys):
    data = tmp_path / "data"
    main(["gen", "--scenarios", "1", "--per", "1", "--seed", "3",
          "--out", str(data), "--max-frames", "25"])
    out = tmp_path / "frames.npz"
    code = main(["rasterize", "--session", str(data / "straight_narrow_00"),
                 "--out", str(out)])
    assert code == 0
    frames = np.load(out)["frames"]
    assert frames.shape[1:] == (59, 59)
    assert set(np.unique(frames)) <= {0, 1}


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    """One short end-to-end train on a small dataset, shared by CLI tests."""
    root = tmp_path_factory.mktemp("cli_e2e")
    data, run = root / "data", root / "run"
    assert main(["gen", "--scenarios", "3", "--per", "2", "--seed", "7",
                 "--out", str(data), "--max-frames", "100"]) == 0
    assert main(["train", "--data", str(data), "--out", str(run),
                 "--alpha", "0.6", "--epochs", "2", "--folds", "2",
                 "--seed", "1"]) == 0
    return data, run


def test_train_writes_artifacts(tiny_run):
    data, run = tiny_run
    assert (run / "fold0.weights").exists()
    assert (run / "fold1.weights").exists()
    report = json.loads((run / "report.json").read_text())
    assert report["config"]["epochs"] == 2
    assert len(report["folds"]) == 2
    curve = (run / "train_curve.csv").read_text().splitlines()
    assert curve[0] == "epoch,fold,loss"
    assert len(curve) == 1 + 2 * 2


def test_eval_reports_loss_and_outputs(tiny_run, tmp_path, capsys):
    data, run = tiny_run
    out = tmp_path / "eval"
    code = main(["eval", "--model", str(run / "fold0.weights"),
                 "--data", str(data), "--out", str(out)])
    assert code == 0
    assert "test loss" in capsys.readouterr().out
    assert (out / "outputs_vs_labels.csv").exists()


def test_flops_worst_case_and_measured(tiny_run, tmp_path, capsys):
    data, run = tiny_run
    out = tmp_path / "flops"
    code = main(["flops", "--model", str(run / "fold0.weights"), "--out", str(out)])
    assert code == 0
    worst = capsys.readouterr().out
    code = main(["flops", "--model", str(run / "fold0.weights"),
                 "--data", str(data), "--out", str(out)])
    assert code == 0
    measured = capsys.readouterr().out

    def snn_of(text):
        return float(text.split("snn")[1].split()[0])

    assert snn_of(measured) < snn_of(worst)
    assert (out / "flops.csv").exists()


def test_sweep_and_report_round_trip(tiny_run, tmp_path, capsys):
    data, _ = tiny_run
    out = tmp_path / "sweep_run"
    code = main(["sweep", "--data", str(data), "--out", str(out),
                 "--alphas", "0.6,1.0", "--epochs", "1", "--folds", "2",
                 "--seed", "1"])
    assert code == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 3  # header + 2 alphas
    assert (out / "sweep.svg").exists()

    rendered = tmp_path / "rendered"
    assert main(["report", "--run", str(out), "--out", str(rendered)]) == 0
    assert (rendered / "sweep.svg").exists()


def test_missing_data_dir_is_runtime_error(capsys):
    assert main(["train", "--data", "/nonexistent", "--out", "/tmp/x",
                 "--epochs", "1"]) == 2

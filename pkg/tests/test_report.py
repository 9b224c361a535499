import numpy as np

from spikenav.flops import WORST_CASE, count_flops
from spikenav.network import init_model
from spikenav.report import (export_flops, export_outputs, export_sweep,
                             read_sweep_csv, write_outputs_csv, write_sweep_csv)
from spikenav.sweep import AlphaEntry, SweepResult


def toy_sweep():
    return SweepResult(
        entries=[
            AlphaEntry(0.3, "scaled", 0.41231, 0.021, 0.07),
            AlphaEntry(0.6, "scaled", 0.2574111098765432, 0.013, 0.031),
            AlphaEntry(1.0, "unscaled", 0.9812, 0.2, 0.19),
        ],
        failures={}, best_alpha=0.6)


def test_sweep_csv_round_trip(tmp_path):
    result = toy_sweep()
    path = tmp_path / "sweep.csv"
    write_sweep_csv(result, path)
    parsed = read_sweep_csv(path)
    assert parsed.best_alpha == result.best_alpha
    for a, b in zip(result.entries, parsed.entries):
        # repr round-trip makes every float bit-identical
        assert (a.alpha, a.mean_loss, a.std_loss, a.flip_rate) == \
               (b.alpha, b.mean_loss, b.std_loss, b.flip_rate)
        assert a.input_scaling == b.input_scaling


def test_sweep_csv_schema(tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(toy_sweep(), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "alpha,mean_loss,std_loss,flip_rate"
    assert len(lines) == 4


def test_export_sweep_writes_plots(tmp_path):
    export_sweep(toy_sweep(), tmp_path)
    assert (tmp_path / "sweep.csv").exists()
    svg = (tmp_path / "sweep.svg").read_text()
    assert svg.startswith("<svg") and "</svg>" in svg
    assert (tmp_path / "flip_rate.svg").exists()


def test_outputs_csv_schema(tmp_path):
    outputs = np.array([[[1.0, -1.0], [1.0, 1.0]]])
    labels = np.array([[[1.0, 1.0], [1.0, 1.0]]])
    path = tmp_path / "out.csv"
    write_outputs_csv(outputs, labels, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k,label_r,label_l,pred_r,pred_l"
    assert lines[1].split(",")[0] == "0"
    assert len(lines) == 3


def test_export_outputs_plots_per_channel(tmp_path):
    rng = np.random.default_rng(0)
    outputs = rng.choice([-1.0, 1.0], size=(2, 10, 2))
    labels = rng.choice([-1.0, 1.0], size=(2, 10, 2))
    export_outputs(outputs, labels, tmp_path)
    assert (tmp_path / "outputs_vs_labels.csv").exists()
    assert (tmp_path / "outputs_right.svg").exists()
    assert (tmp_path / "outputs_left.svg").exists()


def test_flops_csv_layer_rows_and_total(tmp_path):
    model = init_model("snn", seed=0)
    rep = count_flops(model, WORST_CASE)
    export_flops(rep, tmp_path)
    lines = (tmp_path / "flops.csv").read_text().splitlines()
    assert lines[0].startswith("layer,kind,cnn_macs,cnn_flops")
    names = [l.split(",")[0] for l in lines[1:] if l and not l.startswith("#")]
    assert names == ["conv1", "conv2", "conv3", "fc1", "fc2", "fc3", "fc4", "total"]
    assert (tmp_path / "flops.svg").exists()

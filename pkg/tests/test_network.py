import numpy as np
import pytest

from spikenav.lif import LIFParams
from spikenav.network import (CONCAT_WIDTH, FLAT_WIDTH, NetworkModel,
                              forward_sequence, fusion_layers, init_model,
                              init_state, load_weights, network_forward_step,
                              save_weights, zero_params)


def zero_model(mode="snn", alpha=0.6):
    scaling = "unscaled" if alpha == 1.0 else "scaled"
    return NetworkModel(mode=mode, lif=LIFParams(alpha=alpha, input_scaling=scaling),
                        params=zero_params())


def test_zero_network_snn_outputs_minus_one():
    model = zero_model("snn")
    out, state, _ = network_forward_step(model, np.zeros((59, 59)), np.zeros(5))
    assert np.array_equal(out, [-1.0, -1.0])


def test_zero_network_cnn_outputs_zero():
    model = zero_model("cnn")
    out, _, _ = network_forward_step(model, np.zeros((59, 59)), np.zeros(5))
    assert np.array_equal(out, [0.0, 0.0])


def test_shape_trace_through_fusion_graph():
    rng = np.random.default_rng(0)
    model = init_model("snn", LIFParams(alpha=0.6), seed=1)
    frame = (rng.random((59, 59)) < 0.1).astype(np.uint8)
    out, state, rec = network_forward_step(model, frame, np.zeros(5))
    assert rec["u1"].shape == (1, 59, 59, 8)
    assert rec["p1"].shape == (1, 29, 29, 8)
    assert rec["u2"].shape == (1, 29, 29, 16)
    assert rec["p2"].shape == (1, 14, 14, 16)
    assert rec["u3"].shape == (1, 14, 14, 32)
    assert rec["flat"].shape == (1, FLAT_WIDTH)
    assert rec["cat"].shape == (1, CONCAT_WIDTH)
    assert out.shape == (2,)
    assert FLAT_WIDTH == 1568 and CONCAT_WIDTH == 96


def test_layer_spec_table_composes():
    specs = fusion_layers()
    scan_path = [s for s in specs if s.name in
                 ("conv1", "lif1", "pool1", "conv2", "lif2", "pool2",
                  "conv3", "lif3", "pool3", "flatten", "fc1")]
    for a, b in zip(scan_path, scan_path[1:]):
        assert a.out_shape == b.in_shape


def test_snn_outputs_are_plus_minus_one():
    rng = np.random.default_rng(3)
    model = init_model("snn", LIFParams(alpha=0.6), seed=2)
    frames = (rng.random((2, 6, 59, 59)) < 0.15).astype(np.uint8)
    kin = rng.normal(0, 1, size=(2, 6, 5))
    trace = forward_sequence(model, frames, kin)
    assert set(np.unique(trace.outputs)) <= {-1.0, 1.0}


def test_spikes_binary_everywhere():
    rng = np.random.default_rng(4)
    model = init_model("snn", LIFParams(alpha=0.6), seed=5)
    frames = (rng.random((1, 4, 59, 59)) < 0.2).astype(np.uint8)
    kin = rng.normal(0, 1, size=(1, 4, 5))
    trace = forward_sequence(model, frames, kin)
    for rec in trace.steps:
        for key in ("p1", "p2", "flat", "sf2", "cat"):
            assert set(np.unique(rec[key])) <= {0.0, 1.0}, key


def test_cnn_output_continuous_in_unit_interval():
    rng = np.random.default_rng(5)
    model = init_model("cnn", seed=6)
    frames = (rng.random((1, 3, 59, 59)) < 0.2).astype(np.uint8)
    kin = rng.normal(0, 1, size=(1, 3, 5))
    trace = forward_sequence(model, frames, kin)
    assert np.all(np.abs(trace.outputs) < 1.0)


def test_cnn_snn_share_weight_shapes():
    snn = init_model("snn", seed=7)
    cnn = init_model("cnn", seed=7)
    assert snn.params.keys() == cnn.params.keys()
    for k in snn.params:
        assert snn.params[k].shape == cnn.params[k].shape
    # the same tensors are interchangeable between modes
    swapped = NetworkModel(mode="cnn", lif=snn.lif, params=snn.params)
    out, _, _ = network_forward_step(swapped, np.zeros((59, 59)), np.zeros(5))
    assert out.shape == (2,)



def test_state_carry_differs_from_fresh_state():
    rng = np.random.default_rng(6)
    model = init_model("snn", LIFParams(alpha=0.6), seed=8)
    f1 = (rng.random((59, 59)) < 0.3).astype(np.uint8)
    f2 = (rng.random((59, 59)) < 0.3).astype(np.uint8)
    kin = rng.normal(0, 1, size=5)

    trace = forward_sequence(model, np.stack([f1, f2])[None], np.stack([kin, kin])[None])
    carried = trace.steps[1]["u1"]

    fresh_out, _, rec = network_forward_step(model, f2, kin, state=init_state(1))
    assert not np.allclose(carried, rec["u1"])


def test_sequence_length_one_matches_single_step():
    rng = np.random.default_rng(7)
    model = init_model("snn", LIFParams(alpha=0.6), seed=9)
    f = (rng.random((59, 59)) < 0.2).astype(np.uint8)
    kin = rng.normal(0, 1, size=5)
    trace = forward_sequence(model, f[None, None], kin[None, None])
    out, _, _ = network_forward_step(model, f, kin)
    assert np.array_equal(trace.outputs[0, 0], out)


def test_constant_zero_input_stays_quiet():
    model = zero_model("snn")
    frames = np.zeros((1, 5, 59, 59), dtype=np.uint8)
    kin = np.zeros((1, 5, 5))
    trace = forward_sequence(model, frames, kin)
    assert np.all(trace.outputs == -1.0)


def test_unnormalized_kinematics_guard():
    model = init_model("snn", seed=10)  # stats default to mean 0 / std 1
    frames = np.zeros((1, 1, 59, 59), dtype=np.uint8)
    kin = np.full((1, 1, 5), 1000.0)
    with pytest.raises(ValueError, match="10 sigma"):
        forward_sequence(model, frames, kin)


def test_probe_mode_rejected_for_cnn():
    model = init_model("cnn", seed=11)
    with pytest.raises(ValueError, match="probe"):
        forward_sequence(model, np.zeros((1, 1, 59, 59)), np.zeros((1, 1, 5)), probe=True)


def test_weights_round_trip_bit_identical(tmp_path):
    model = init_model("snn", LIFParams(alpha=0.37), seed=12)
    model.kin_mean = np.array([0.1, -0.2, 0.3, 0.0, 2.5])
    model.kin_std = np.array([1.0, 2.0, 0.5, 1.5, 3.0])
    path = tmp_path / "model.weights"
    save_weights(model, path)
    loaded = load_weights(path)
    assert loaded.mode == model.mode
    assert loaded.lif == model.lif
    assert np.array_equal(loaded.kin_mean, model.kin_mean)
    assert np.array_equal(loaded.kin_std, model.kin_std)
    for name in model.params:
        assert np.array_equal(loaded.params[name], model.params[name]), name
    # saving the loaded model reproduces the file byte for byte
    save_weights(loaded, tmp_path / "again.weights")
    assert (tmp_path / "again.weights").read_bytes() == path.read_bytes()


def test_model_shape_validation():
    params = zero_params()
    params["fc4_w"] = np.zeros((3, 96))
    with pytest.raises(ValueError, match="fc4_w"):
        NetworkModel(mode="snn", lif=LIFParams(alpha=0.6), params=params)

"""The two-path fusion network and its time-unrolled gradients.

Scan path:  59x59 frame -> [conv8 + LIF + pool] -> [conv16 + LIF + pool]
            -> [conv32 + LIF + pool] -> flatten(1568) -> FC1(64) + LIF
Kin path:   5-dim state (z-scored) -> FC2(16) + LIF -> FC3(32) + LIF
Fusion:     concat(96) -> FC4(2) + LIF -> remap {0,1} -> {-1,1}

The CNN counterpart keeps every weight shape and swaps LIF for ReLU on
hidden layers and tanh at the output, stateless per frame.

Backward runs full reverse accumulation through the window. At every spike
the derivative is the Gaussian surrogate of the threshold-centered membrane
potential; the hard reset is invisible to the gradient (the recurrence term
alpha * V backpropagates as if the potential had not been cleared). A
"probe" forward swaps the hard threshold for its smooth integral and
disables the reset, making the same backward pass an exact derivative that
finite differences can certify.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .layers import (conv_forward, conv_input_grad, conv_param_grads,
                     fc_forward, maxpool2, maxpool2_backward, remap_output)
from .lif import _GAUSS_NORM, LIFParams, lif_update, lif_update_smooth
from .raster import GRID

WEIGHTS_FORMAT = "SPIKENAV1"

CONV_CHANNELS = (8, 16, 32)
FC1_WIDTH = 64
FC2_WIDTH = 16
FC3_WIDTH = 32
FLAT_WIDTH = 7 * 7 * CONV_CHANNELS[2]     # 1568
CONCAT_WIDTH = FC1_WIDTH + FC3_WIDTH      # 96
KIN_DIM = 5
OUT_DIM = 2


@dataclass(frozen=True)
class LayerSpec:
    kind: str                   # conv3x3 | maxpool2 | fully_connected | lif | relu | tanh | flatten | concat
    name: str
    in_shape: tuple[int, ...]
    out_shape: tuple[int, ...]


def fusion_layers() -> tuple[LayerSpec, ...]:
    """Ordered layer table of the fusion graph (scan path, kin path, head)."""
    g = GRID
    c1, c2, c3 = CONV_CHANNELS
    return (
        LayerSpec("conv3x3", "conv1", (g, g, 1), (g, g, c1)),
        LayerSpec("lif", "lif1", (g, g, c1), (g, g, c1)),
        LayerSpec("maxpool2", "pool1", (g, g, c1), (29, 29, c1)),
        LayerSpec("conv3x3", "conv2", (29, 29, c1), (29, 29, c2)),
        LayerSpec("lif", "lif2", (29, 29, c2), (29, 29, c2)),
        LayerSpec("maxpool2", "pool2", (29, 29, c2), (14, 14, c2)),
        LayerSpec("conv3x3", "conv3", (14, 14, c2), (14, 14, c3)),
        LayerSpec("lif", "lif3", (14, 14, c3), (14, 14, c3)),
        LayerSpec("maxpool2", "pool3", (14, 14, c3), (7, 7, c3)),
        LayerSpec("flatten", "flatten", (7, 7, c3), (FLAT_WIDTH,)),
        LayerSpec("fully_connected", "fc1", (FLAT_WIDTH,), (FC1_WIDTH,)),
        LayerSpec("lif", "lif_fc1", (FC1_WIDTH,), (FC1_WIDTH,)),
        LayerSpec("fully_connected", "fc2", (KIN_DIM,), (FC2_WIDTH,)),
        LayerSpec("lif", "lif_fc2", (FC2_WIDTH,), (FC2_WIDTH,)),
        LayerSpec("fully_connected", "fc3", (FC2_WIDTH,), (FC3_WIDTH,)),
        LayerSpec("lif", "lif_fc3", (FC3_WIDTH,), (FC3_WIDTH,)),
        LayerSpec("concat", "concat", (FC1_WIDTH, FC3_WIDTH), (CONCAT_WIDTH,)),
        LayerSpec("fully_connected", "fc4", (CONCAT_WIDTH,), (OUT_DIM,)),
        LayerSpec("lif", "lif_fc4", (OUT_DIM,), (OUT_DIM,)),
    )


PARAM_SHAPES = {
    "conv1_w": (3, 3, 1, CONV_CHANNELS[0]), "conv1_b": (CONV_CHANNELS[0],),
    "conv2_w": (3, 3, CONV_CHANNELS[0], CONV_CHANNELS[1]), "conv2_b": (CONV_CHANNELS[1],),
    "conv3_w": (3, 3, CONV_CHANNELS[1], CONV_CHANNELS[2]), "conv3_b": (CONV_CHANNELS[2],),
    "fc1_w": (FC1_WIDTH, FLAT_WIDTH), "fc1_b": (FC1_WIDTH,),
    "fc2_w": (FC2_WIDTH, KIN_DIM), "fc2_b": (FC2_WIDTH,),
    "fc3_w": (FC3_WIDTH, FC2_WIDTH), "fc3_b": (FC3_WIDTH,),
    "fc4_w": (OUT_DIM, CONCAT_WIDTH), "fc4_b": (OUT_DIM,),
}
PARAM_ORDER = tuple(PARAM_SHAPES)

_LIF_SHAPES = {
    "v1": (GRID, GRID, CONV_CHANNELS[0]),
    "v2": (29, 29, CONV_CHANNELS[1]),
    "v3": (14, 14, CONV_CHANNELS[2]),
    "vf1": (FC1_WIDTH,), "vf2": (FC2_WIDTH,), "vf3": (FC3_WIDTH,), "vf4": (OUT_DIM,),
}


@dataclass
class NetworkModel:
    """Weights, LIF constants and kinematics normalization for one network."""

    mode: str                       # "snn" | "cnn"
    lif: LIFParams
    params: dict[str, np.ndarray]
    kin_mean: np.ndarray = field(default_factory=lambda: np.zeros(KIN_DIM))
    kin_std: np.ndarray = field(default_factory=lambda: np.ones(KIN_DIM))
    spec: tuple[LayerSpec, ...] = field(default_factory=fusion_layers)

    def __post_init__(self):
        if self.mode not in ("snn", "cnn"):
            raise ValueError(f"unknown mode {self.mode!r}")
        for name, shape in PARAM_SHAPES.items():
            if name not in self.params:
                raise ValueError(f"missing parameter {name}")
            if self.params[name].shape != shape:
                raise ValueError(f"parameter {name} has shape "
                                 f"{self.params[name].shape}, expected {shape}")
        self.kin_mean = np.asarray(self.kin_mean, dtype=np.float64)
        self.kin_std = np.asarray(self.kin_std, dtype=np.float64)
        if self.kin_mean.shape != (KIN_DIM,) or self.kin_std.shape != (KIN_DIM,):
            raise ValueError("kinematics stats must be 5-vectors")

    def normalize_kin(self, kin: np.ndarray) -> np.ndarray:
        z = (np.asarray(kin, dtype=np.float64) - self.kin_mean) / self.kin_std
        if np.abs(z).max(initial=0.0) > 10.0:
            raise ValueError(
                "kinematics exceed 10 sigma after normalization; "
                "inputs look unnormalized for this model's stored statistics")
        return z


def init_params(seed: int, input_gain: float = 1.0) -> dict[str, np.ndarray]:
    """Uniform +/- sqrt(6 / fan_in) / input_gain weights, zero biases, fixed
    draw order.

    Dividing by the LIF input gain keeps the initial membrane drive
    independent of the decay constant: under the scaled update the current
    is attenuated by (1 - alpha), and uncompensated weights leave strongly
    leaky networks nearly silent, wasting most of a short training budget
    before the first spikes appear.
    """
    rng = np.random.default_rng(seed)
    params = {}
    for name in PARAM_ORDER:
        shape = PARAM_SHAPES[name]
        if name.endswith("_b"):
            params[name] = np.zeros(shape, dtype=np.float64)
            continue
        fan_in = 9 * shape[2] if len(shape) == 4 else shape[1]
        lim = math.sqrt(6.0 / fan_in) / input_gain
        params[name] = rng.uniform(-lim, lim, size=shape)
    return params


def init_model(mode: str = "snn", lif: LIFParams | None = None,
               seed: int = 0) -> NetworkModel:
    lif = lif or LIFParams(alpha=0.6)
    gain = lif.input_gain if mode == "snn" else 1.0
    return NetworkModel(mode=mode, lif=lif, params=init_params(seed, gain))


def zero_params() -> dict[str, np.ndarray]:
    return {name: np.zeros(shape, dtype=np.float64)
            for name, shape in PARAM_SHAPES.items()}


def init_state(batch: int) -> dict[str, np.ndarray]:
    """Zero membrane potentials for every LIF layer."""
    return {k: np.zeros((batch,) + shape, dtype=np.float64)
            for k, shape in _LIF_SHAPES.items()}


@dataclass
class ForwardTrace:
    """Everything the backward pass needs, per timestep."""

    mode: str
    probe: bool
    frames: np.ndarray        # (B, T, 59, 59)
    kin_norm: np.ndarray      # (B, T, 5)
    steps: list[dict]
    outputs: np.ndarray       # (B, T, 2); snn: in {-1, 1}


def _forward_one(model: NetworkModel, x: np.ndarray, kinz: np.ndarray,
                 state: dict[str, np.ndarray] | None, probe: bool):
    """One timestep through the fusion graph.

    x: (B, 59, 59, 1) float64, kinz: (B, 5) normalized.
    Returns (output (B, 2), new_state, step_record). CNN mode is stateless
    (state in and out is None).
    """
    p = model.params
    snn = model.mode == "snn"
    rec = {}
    if snn:
        update = lif_update_smooth if probe else lif_update
        new_state = {}

        def stage(key, j):
            s, v, u = update(state[key], model.lif, j)
            new_state[key] = v
            rec["u" + key[1:]] = u
            return s
    else:
        new_state = None

        def stage(key, j):
            rec["u" + key[1:]] = j
            return np.maximum(j, 0.0)

    j1 = conv_forward(x, p["conv1_w"], p["conv1_b"])
    s1 = stage("v1", j1)
    p1, i1 = maxpool2(s1)
    j2 = conv_forward(p1, p["conv2_w"], p["conv2_b"])
    s2 = stage("v2", j2)
    p2, i2 = maxpool2(s2)
    j3 = conv_forward(p2, p["conv3_w"], p["conv3_b"])
    s3 = stage("v3", j3)
    p3, i3 = maxpool2(s3)
    flat = p3.reshape(p3.shape[0], FLAT_WIDTH)
    jf1 = fc_forward(flat, p["fc1_w"], p["fc1_b"])
    sf1 = stage("vf1", jf1)

    jf2 = fc_forward(kinz, p["fc2_w"], p["fc2_b"])
    sf2 = stage("vf2", jf2)
    jf3 = fc_forward(sf2, p["fc3_w"], p["fc3_b"])
    sf3 = stage("vf3", jf3)

    cat = np.concatenate([sf1, sf3], axis=1)
    jf4 = fc_forward(cat, p["fc4_w"], p["fc4_b"])
    if snn:
        sf4 = stage("vf4", jf4)
        out = remap_output(sf4)
    else:
        rec["uf4"] = jf4
        out = np.tanh(jf4)
        rec["y4"] = out

    rec.update(p1=p1, p2=p2, flat=flat, sf2=sf2, cat=cat, i1=i1, i2=i2, i3=i3)
    return out, new_state, rec


def network_forward_step(model: NetworkModel, frame: np.ndarray, kin: np.ndarray,
                         state: dict[str, np.ndarray] | None = None,
                         probe: bool = False):
    """Single-frame forward: returns (output 2-vector, new state, trace record)."""
    frame = np.asarray(frame)
    if frame.shape != (GRID, GRID):
        raise ValueError(f"frame must be {GRID}x{GRID}, got {frame.shape}")
    if state is None and model.mode == "snn":
        state = init_state(1)
    x = frame.astype(np.float64)[None, :, :, None]
    kinz = model.normalize_kin(np.asarray(kin, dtype=np.float64).reshape(1, KIN_DIM))
    out, new_state, rec = _forward_one(model, x, kinz, state, probe)
    return out[0], new_state, rec


def forward_sequence(model: NetworkModel, frames: np.ndarray, kin: np.ndarray,
                     probe: bool = False) -> ForwardTrace:
    """Run a window (or batch of windows) with membrane state carried across
    steps; state is zero-initialized at the window start.

    frames: (B, T, 59, 59) or (T, 59, 59); kin likewise without/with batch.
    """
    frames = np.asarray(frames)
    kin = np.asarray(kin, dtype=np.float64)
    if frames.ndim == 3:
        frames, kin = frames[None], kin[None]
    if frames.ndim != 4 or frames.shape[2:] != (GRID, GRID):
        raise ValueError(f"frames must be (B, T, {GRID}, {GRID}), got {frames.shape}")
    b, t = frames.shape[:2]
    if kin.shape != (b, t, KIN_DIM):
        raise ValueError(f"kinematics must be ({b}, {t}, {KIN_DIM}), got {kin.shape}")
    if probe and model.mode != "snn":
        raise ValueError("probe mode applies to snn models only")

    kin_norm = model.normalize_kin(kin)
    state = init_state(b) if model.mode == "snn" else None
    steps = []
    outputs = np.zeros((b, t, OUT_DIM))
    for k in range(t):
        x = frames[:, k].astype(np.float64)[:, :, :, None]
        out, state, rec = _forward_one(model, x, kin_norm[:, k], state, probe)
        outputs[:, k] = out
        steps.append(rec)
    return ForwardTrace(mode=model.mode, probe=probe, frames=frames,
                        kin_norm=kin_norm, steps=steps, outputs=outputs)


def bptt_backward(model: NetworkModel, trace: ForwardTrace,
                  g_out: np.ndarray) -> dict[str, np.ndarray]:
    """Reverse accumulation through every timestep of a recorded forward.

    g_out is dL/d(outputs), shape (B, T, 2). Returns gradients shaped like
    the parameters.
    """
    p = model.params
    b, t = trace.frames.shape[:2]
    if g_out.shape != (b, t, OUT_DIM):
        raise ValueError(f"g_out must be ({b}, {t}, {OUT_DIM}), got {g_out.shape}")
    grads = {name: np.zeros_like(p[name]) for name in PARAM_ORDER}
    snn = trace.mode == "snn"
    alpha = model.lif.alpha
    gain = model.lif.input_gain
    theta = model.lif.threshold

    gu_next = {k: np.zeros((b,) + shape) for k, shape in _LIF_SHAPES.items()} if snn else None

    def through_nl(key, g_spike, rec):
        """dL/dJ at a nonlinearity given dL/d(spike or activation)."""
        u = rec["u" + key[1:]]
        if snn:
            # fused in place: gu = g_spike * surrogate(u - theta) + alpha * gu_next
            f = u - theta
            np.multiply(f, f, out=f)
            f *= -2.0
            np.exp(f, out=f)
            f *= _GAUSS_NORM
            f *= g_spike
            f += alpha * gu_next[key]
            gu_next[key] = f
            return gain * f
        return g_spike * (u > 0.0)

    for k in reversed(range(t)):
        rec = trace.steps[k]
        if snn:
            gs4 = 2.0 * g_out[:, k]             # remap 2s - 1
            gj4 = through_nl("vf4", gs4, rec)
        else:
            gj4 = g_out[:, k] * (1.0 - rec["y4"] ** 2)
        grads["fc4_w"] += gj4.T @ rec["cat"]
        grads["fc4_b"] += gj4.sum(axis=0)
        gcat = gj4 @ p["fc4_w"]
        gsf1, gsf3 = gcat[:, :FC1_WIDTH], gcat[:, FC1_WIDTH:]

        gjf3 = through_nl("vf3", gsf3, rec)
        grads["fc3_w"] += gjf3.T @ rec["sf2"]
        grads["fc3_b"] += gjf3.sum(axis=0)
        gsf2 = gjf3 @ p["fc3_w"]

        gjf2 = through_nl("vf2", gsf2, rec)
        grads["fc2_w"] += gjf2.T @ trace.kin_norm[:, k]
        grads["fc2_b"] += gjf2.sum(axis=0)

        gjf1 = through_nl("vf1", gsf1, rec)
        grads["fc1_w"] += gjf1.T @ rec["flat"]
        grads["fc1_b"] += gjf1.sum(axis=0)
        gflat = gjf1 @ p["fc1_w"]

        gp3 = gflat.reshape(b, 7, 7, CONV_CHANNELS[2])
        gs3 = maxpool2_backward(gp3, rec["i3"], (b, 14, 14, CONV_CHANNELS[2]))
        gj3 = through_nl("v3", gs3, rec)
        gk, gb = conv_param_grads(rec["p2"], gj3, CONV_CHANNELS[2])
        grads["conv3_w"] += gk
        grads["conv3_b"] += gb
        gp2 = conv_input_grad(gj3, p["conv3_w"])

        gs2 = maxpool2_backward(gp2, rec["i2"], (b, 29, 29, CONV_CHANNELS[1]))
        gj2 = through_nl("v2", gs2, rec)
        gk, gb = conv_param_grads(rec["p1"], gj2, CONV_CHANNELS[1])
        grads["conv2_w"] += gk
        grads["conv2_b"] += gb
        gp1 = conv_input_grad(gj2, p["conv2_w"])

        gs1 = maxpool2_backward(gp1, rec["i1"], (b, GRID, GRID, CONV_CHANNELS[0]))
        gj1 = through_nl("v1", gs1, rec)
        x = trace.frames[:, k].astype(np.float64)[:, :, :, None]
        gk, gb = conv_param_grads(x, gj1, CONV_CHANNELS[0])
        grads["conv1_w"] += gk
        grads["conv1_b"] += gb

    return grads


def _fmt(x: float) -> str:
    return repr(float(x))


def save_weights(model: NetworkModel, path: str | os.PathLike) -> None:
    """Write the SPIKENAV1 weights file; values round-trip bit-identically."""
    path = os.fspath(path)
    header = {
        "format": WEIGHTS_FORMAT,
        "mode": model.mode,
        "alpha": model.lif.alpha,
        "theta": model.lif.threshold,
        "input_scaling": model.lif.input_scaling,
        "kin_mean": [float(v) for v in model.kin_mean],
        "kin_std": [float(v) for v in model.kin_std],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(header) + "\n")
        for name in PARAM_ORDER:
            tensor = model.params[name]
            dims = " ".join(str(d) for d in tensor.shape)
            f.write(f"{name} {dims}\n")
            flat = tensor.reshape(-1)
            for i in range(0, flat.size, 8):
                f.write(" ".join(_fmt(v) for v in flat[i:i + 8]) + "\n")


def load_weights(path: str | os.PathLike) -> NetworkModel:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as f:
        header = json.loads(f.readline())
        if header.get("format") != WEIGHTS_FORMAT:
            raise ValueError(f"{path}: not a {WEIGHTS_FORMAT} weights file")
        tokens = f.read().split()
    params = {}
    pos = 0
    while pos < len(tokens):
        name = tokens[pos]
        if name not in PARAM_SHAPES:
            raise ValueError(f"{path}: unknown tensor {name!r}")
        ndim = len(PARAM_SHAPES[name])
        shape = tuple(int(v) for v in tokens[pos + 1:pos + 1 + ndim])
        pos += 1 + ndim
        count = int(np.prod(shape))
        vals = np.array([float(v) for v in tokens[pos:pos + count]], dtype=np.float64)
        if vals.size != count:
            raise ValueError(f"{path}: tensor {name!r} truncated")
        params[name] = vals.reshape(shape)
        pos += count
    lif = LIFParams(alpha=header["alpha"], threshold=header["theta"],
                    input_scaling=header["input_scaling"])
    return NetworkModel(mode=header["mode"], lif=lif, params=params,
                        kin_mean=np.array(header["kin_mean"]),
                        kin_std=np.array(header["kin_std"]))

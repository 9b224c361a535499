"""Per-inference FLOP accounting for the CNN and SNN variants.

Accounting model, echoed in every report because no standard exists:

* CNN: each weighted layer costs 2 FLOPs per MAC (multiply + add over the
  dense connectivity, conv positions included, zero-padded borders counted)
  plus 1 FLOP per activation evaluation.
* SNN, per timestep: the synaptic path does additions only, 1 FLOP per
  (input event x fan-out) pair; every neuron pays 3 FLOPs for its update
  (leak multiply, add, threshold compare). The 5 real-valued kinematics
  inputs are idealized as 5 always-active events so both models count the
  same connectivity.

Under this model the worst-case SNN synaptic addition count equals the CNN
MAC count exactly (every connection touched once).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import NetworkModel, forward_sequence

ASSUMPTIONS = ("cnn: 2 flops/mac + 1 flop/activation; "
               "snn: 1 flop/synaptic addition (input events x fan-out) "
               "+ 3 flops/neuron update; kinematics input counted as 5 events")

WORST_CASE = "worst_case"


@dataclass(frozen=True)
class LayerCost:
    name: str
    kind: str
    cnn_macs: int
    cnn_flops: int
    snn_input_events: float
    snn_synaptic_flops: float
    snn_update_flops: int
    snn_flops: float


@dataclass
class FlopsReport:
    layers: list[LayerCost]
    cnn_total: int
    snn_total: float
    activity: dict[str, float]
    assumptions: str = ASSUMPTIONS


def _weighted_layers(model: NetworkModel):
    """(name, kind, max_input_events, fan_out_per_event, macs, neurons)."""
    rows = []
    for spec in model.spec:
        if spec.kind == "conv3x3":
            h, w, cin = spec.in_shape
            cout = spec.out_shape[2]
            rows.append((spec.name, spec.kind, h * w * cin, 9 * cout,
                         h * w * cout * 9 * cin, h * w * cout))
        elif spec.kind == "fully_connected":
            win, wout = spec.in_shape[0], spec.out_shape[0]
            rows.append((spec.name, spec.kind, win, wout, win * wout, wout))
    return rows


def measure_activity(model: NetworkModel, frames: np.ndarray,
                     kin: np.ndarray) -> dict[str, float]:
    """Mean input events per timestep at each weighted layer, from data.

    The model must be an SNN; events are counted on the actual spike
    tensors feeding each layer. The kinematics entry is the fixed 5.
    """
    if model.mode != "snn":
        raise ValueError("activity is measured on snn models")
    trace = forward_sequence(model, frames, kin)
    b = trace.frames.shape[0]
    t = len(trace.steps)
    total = {name: 0.0 for name, *_ in _weighted_layers(model)}
    total["conv1"] = float(trace.frames.sum())
    for rec in trace.steps:
        total["conv2"] += float(rec["p1"].sum())
        total["conv3"] += float(rec["p2"].sum())
        total["fc1"] += float(rec["flat"].sum())
        total["fc3"] += float(rec["sf2"].sum())
        total["fc4"] += float(rec["cat"].sum())
    activity = {name: v / (b * t) for name, v in total.items()}
    activity["fc2"] = 5.0
    return activity


def count_flops(model: NetworkModel, activity=WORST_CASE) -> FlopsReport:
    """Tally per-inference FLOPs for both accounting models.

    ``activity`` is either "worst_case" (every input element active) or a
    dict of mean input events per weighted layer, as from measure_activity.
    """
    rows = _weighted_layers(model)
    if activity != WORST_CASE:
        missing = [name for name, *_ in rows if name not in activity]
        if missing:
            raise ValueError(f"activity vector missing layers: {missing}")
    layers = []
    for name, kind, max_events, fan_out, macs, neurons in rows:
        events = float(max_events) if activity == WORST_CASE else float(activity[name])
        if events < 0 or events > max_events + 1e-9:
            raise ValueError(f"activity for {name} out of range [0, {max_events}]")
        synaptic = events * fan_out
        update = 3 * neurons
        layers.append(LayerCost(
            name=name, kind=kind, cnn_macs=macs, cnn_flops=2 * macs + neurons,
            snn_input_events=events, snn_synaptic_flops=synaptic,
            snn_update_flops=update, snn_flops=synaptic + update))
    act_echo = ({name: float(r.snn_input_events) for name, r in
                 zip((row[0] for row in rows), layers)}
                if activity == WORST_CASE else dict(activity))
    return FlopsReport(layers=layers,
                       cnn_total=sum(l.cnn_flops for l in layers),
                       snn_total=float(sum(l.snn_flops for l in layers)),
                       activity=act_echo)

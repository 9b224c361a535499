"""Minimal fully-connected spiking stack.

A plain chain of (fc -> LIF) layers over a timestep sequence, sharing the
exact membrane, surrogate and reset-gradient rules of the fusion network.
Small instances of this stack are the targets for the gradient oracles:
finite differences in smooth-probe mode, and an independent hand-unrolled
differentiation in hard mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import fc_forward, remap_output
from .lif import LIFParams, lif_update, lif_update_smooth, surrogate_grad


@dataclass
class SpikingStack:
    """FC+LIF chain; weights[i] has shape (width[i+1], width[i])."""

    lif: LIFParams
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def init(cls, widths: list[int], lif: LIFParams, seed: int = 0) -> "SpikingStack":
        rng = np.random.default_rng(seed)
        ws, bs = [], []
        for fan_in, fan_out in zip(widths, widths[1:]):
            lim = np.sqrt(6.0 / fan_in)
            ws.append(rng.uniform(-lim, lim, size=(fan_out, fan_in)))
            bs.append(np.zeros(fan_out))
        return cls(lif=lif, weights=ws, biases=bs)

    @property
    def n_layers(self) -> int:
        return len(self.weights)


@dataclass
class StackTrace:
    inputs: np.ndarray            # (B, T, in_width)
    probe: bool
    us: list[list[np.ndarray]]    # [t][layer] pre-reset membranes (B, width)
    spikes: list[list[np.ndarray]]
    outputs: np.ndarray           # (B, T, out_width), remapped to {-1, 1}


def stack_forward(stack: SpikingStack, inputs: np.ndarray,
                  probe: bool = False) -> StackTrace:
    """Run a (B, T, in) sequence; membrane state starts at zero."""
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim == 2:
        inputs = inputs[None]
    b, t, _ = inputs.shape
    update = lif_update_smooth if probe else lif_update
    v = [np.zeros((b, w.shape[0])) for w in stack.weights]
    us, spikes = [], []
    outputs = np.zeros((b, t, stack.weights[-1].shape[0]))
    for k in range(t):
        x = inputs[:, k]
        us_k, sp_k = [], []
        for i, (w, bias) in enumerate(zip(stack.weights, stack.biases)):
            j = fc_forward(x, w, bias)
            s, v[i], u = update(v[i], stack.lif, j)
            us_k.append(u)
            sp_k.append(s)
            x = s
        us.append(us_k)
        spikes.append(sp_k)
        outputs[:, k] = remap_output(x)
    return StackTrace(inputs=inputs, probe=probe, us=us, spikes=spikes, outputs=outputs)


def stack_backward(stack: SpikingStack, trace: StackTrace,
                   g_out: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """BPTT through the stack given dL/d(outputs); returns (dW list, db list)."""
    g_out = np.asarray(g_out, dtype=np.float64)
    b, t, _ = trace.inputs.shape
    alpha, gain, theta = stack.lif.alpha, stack.lif.input_gain, stack.lif.threshold
    gws = [np.zeros_like(w) for w in stack.weights]
    gbs = [np.zeros_like(bb) for bb in stack.biases]
    gu_next = [np.zeros((b, w.shape[0])) for w in stack.weights]
    for k in reversed(range(t)):
        gs = 2.0 * g_out[:, k]          # remap 2s - 1
        for i in reversed(range(stack.n_layers)):
            u = trace.us[k][i]
            gu = gs * surrogate_grad(u - theta) + alpha * gu_next[i]
            gu_next[i] = gu
            gj = gain * gu
            layer_in = trace.inputs[:, k] if i == 0 else trace.spikes[k][i - 1]
            gws[i] += gj.T @ layer_in
            gbs[i] += gj.sum(axis=0)
            gs = gj @ stack.weights[i]
    return gws, gbs

"""Leaky integrate-and-fire dynamics and the Gaussian surrogate gradient.

Membrane update per step, elementwise over a tensor of neurons:

    scaled:    V' = alpha * V + (1 - alpha) * J
    unscaled:  V' = alpha * V + J        (alpha = 1 gives pure integrate-and-fire)

Where V' crosses the threshold the neuron emits 1 and its stored potential
hard-resets to zero; otherwise it keeps V'. The spike derivative used during
backprop is a Gaussian bump of the threshold-centered potential, and the
reset is ignored by the backward pass (gradient flows through alpha * V as
if the potential had not been cleared).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

SCALED = "scaled"
UNSCALED = "unscaled"

_GAUSS_NORM = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LIFParams:
    """Neuron constants: decay alpha in (0, 1], threshold, input scaling mode."""

    alpha: float
    threshold: float = 1.0
    input_scaling: str = SCALED

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be > 0")
        if self.input_scaling not in (SCALED, UNSCALED):
            raise ValueError(f"unknown input_scaling {self.input_scaling!r}")
        if self.alpha == 1.0 and self.input_scaling == SCALED:
            # (1 - alpha) * J would zero all input; alpha = 1 only makes
            # sense in unscaled (integrate-and-fire) mode
            raise ValueError("alpha = 1 requires input_scaling='unscaled'")

    @property
    def input_gain(self) -> float:
        return (1.0 - self.alpha) if self.input_scaling == SCALED else 1.0


@dataclass
class LIFLayerState:
    """Stored membrane potentials for one layer; zeros before the first step."""

    v: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "LIFLayerState":
        return cls(v=np.zeros(shape, dtype=np.float64))


def membrane_update(v: np.ndarray, params: LIFParams, j: np.ndarray) -> np.ndarray:
    """Pre-reset candidate potential for one step."""
    return params.alpha * v + params.input_gain * j


def lif_update(v: np.ndarray, params: LIFParams,
               j: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raw-array step: returns (spikes, stored potential, pre-reset potential)."""
    u = v * params.alpha
    u += params.input_gain * j
    fired = u >= params.threshold
    v_next = np.where(fired, 0.0, u)
    return fired.astype(np.float64), v_next, u


def lif_step(state: LIFLayerState, params: LIFParams,
             j: np.ndarray) -> tuple[np.ndarray, LIFLayerState]:
    """One LIF step over a layer: binary spikes out, potentials updated in place
    of the returned state. Raises on shape mismatch."""
    j = np.asarray(j, dtype=np.float64)
    if j.shape != state.v.shape:
        raise ValueError(f"input shape {j.shape} does not match state {state.v.shape}")
    spikes, v_next, _ = lif_update(state.v, params, j)
    return spikes, LIFLayerState(v=v_next)


def surrogate_grad(v_centered):
    """Gaussian stand-in for the spike derivative: (1/sqrt(2*pi)) * exp(-2 v^2),
    evaluated at v = V - threshold."""
    v = np.asarray(v_centered, dtype=np.float64)
    out = _GAUSS_NORM * np.exp(-2.0 * v * v)
    return float(out) if np.isscalar(v_centered) else out


def spike_nonlinearity_backward(u: np.ndarray, params: LIFParams) -> np.ndarray:
    """Backprop factor d(spike)/d(membrane) at recorded pre-reset potentials:
    the Gaussian surrogate of u - threshold."""
    return surrogate_grad(np.asarray(u, dtype=np.float64) - params.threshold)


def smooth_spike(v_centered):
    """Differentiable spike stand-in g(v) = (1 + erf(sqrt(2) v)) / 4.

    Its derivative is exactly the Gaussian surrogate, which makes backprop
    against finite differences an exact check when this replaces the hard
    threshold (and the reset is disabled).
    """
    v = np.asarray(v_centered, dtype=np.float64)
    out = 0.25 * (1.0 + erf(math.sqrt(2.0) * v))
    return float(out) if np.isscalar(v_centered) else out


def lif_update_smooth(v: np.ndarray, params: LIFParams,
                      j: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smooth-probe step: continuous pseudo-spikes, no reset.

    Returns (pseudo-spikes, stored potential, pre-reset potential); the
    stored potential equals the pre-reset one because nothing resets.
    """
    u = membrane_update(v, params, j)
    return smooth_spike(u - params.threshold), u, u

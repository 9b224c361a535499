"""Dense tensor layers: 3x3 same-size convolution, 2x2 max pooling,
fully-connected products, and the {0,1} -> {-1,1} output remap.

Tensors are batch-first, channels-last: activations (B, H, W, C), conv
kernels (3, 3, C_in, C_out), fc weights (out, in). Convolution is
cross-correlation with zero padding 1 and stride 1, so spatial size is
preserved and the pooling chain runs 59 -> 29 -> 14 -> 7.

Convolution gathers the nine shifted views of the padded input with bulk
slice copies and runs a single matrix product; at these layer sizes the
per-position patch gather costs more than the arithmetic.
"""

from __future__ import annotations

import numpy as np

KERNEL = 3


def _check_conv_shapes(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> None:
    if x.ndim != 4:
        raise ValueError(f"conv input must be (B, H, W, C), got {x.shape}")
    if kernel.shape[:2] != (KERNEL, KERNEL) or kernel.shape[2] != x.shape[3]:
        raise ValueError(f"kernel {kernel.shape} does not compose with input {x.shape}")
    if bias.shape != (kernel.shape[3],):
        raise ValueError(f"bias shape {bias.shape} != ({kernel.shape[3]},)")


def _padded(x: np.ndarray) -> np.ndarray:
    return np.pad(x.astype(np.float64, copy=False), ((0, 0), (1, 1), (1, 1), (0, 0)))


def conv_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-size cross-correlation; output is the input current to the next layer."""
    _check_conv_shapes(x, kernel, bias)
    b, h, w, cin = x.shape
    cout = kernel.shape[3]
    xp = _padded(x)
    if cin == 1:
        # single channel: one gather + one matrix product wins
        cols = np.concatenate([xp[:, i:i + h, j:j + w, :]
                               for i in range(KERNEL) for j in range(KERNEL)], axis=3)
        out = cols.reshape(b * h * w, 9) @ kernel.reshape(9, cout)
        return out.reshape(b, h, w, cout) + bias
    out = np.empty((b, h, w, cout))
    out[:] = bias
    for i in range(KERNEL):
        for j in range(KERNEL):
            out += xp[:, i:i + h, j:j + w, :] @ kernel[i, j]
    return out


def conv_param_grads(x: np.ndarray, g_out: np.ndarray,
                     cout: int) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of kernel and bias given the input and the output gradient."""
    b, h, w, cin = x.shape
    xp = _padded(x)
    gk = np.empty((KERNEL, KERNEL, cin, cout))
    axes = ([0, 1, 2], [0, 1, 2])
    for i in range(KERNEL):
        for j in range(KERNEL):
            gk[i, j] = np.tensordot(xp[:, i:i + h, j:j + w, :], g_out, axes=axes)
    return gk, g_out.sum(axis=(0, 1, 2))


def conv_input_grad(g_out: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the conv input: correlate with the 180-degree-rotated,
    channel-swapped kernel."""
    k_rot = kernel[::-1, ::-1].transpose(0, 1, 3, 2)
    return conv_forward(g_out, k_rot, np.zeros(kernel.shape[2]))


def maxpool2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2 non-overlapping max; trailing odd row/column dropped.

    Returns (pooled, argmax) where argmax in {0..3} indexes the in-block
    position (row-major) that won, for gradient routing.
    """
    b, h, w, c = x.shape
    if h < 2 or w < 2:
        raise ValueError(f"pool input spatial dims must be >= 2, got {h}x{w}")
    ho, wo = h // 2, w // 2
    s00 = x[:, 0:2 * ho:2, 0:2 * wo:2, :]
    s01 = x[:, 0:2 * ho:2, 1:2 * wo:2, :]
    s10 = x[:, 1:2 * ho:2, 0:2 * wo:2, :]
    s11 = x[:, 1:2 * ho:2, 1:2 * wo:2, :]
    pooled = np.maximum(np.maximum(s00, s01), np.maximum(s10, s11))
    # first max wins, row-major in-block order, matching argmax semantics
    idx = np.where(s00 == pooled, 0,
                   np.where(s01 == pooled, 1,
                            np.where(s10 == pooled, 2, 3)))
    return pooled, idx.astype(np.int8)


def maxpool2_backward(g_pooled: np.ndarray, idx: np.ndarray,
                      input_shape: tuple[int, ...]) -> np.ndarray:
    """Route pooled gradients back to the winning in-block positions."""
    b, h, w, c = input_shape
    ho, wo = h // 2, w // 2
    full = np.zeros(input_shape, dtype=np.float64)
    full[:, 0:2 * ho:2, 0:2 * wo:2, :] = g_pooled * (idx == 0)
    full[:, 0:2 * ho:2, 1:2 * wo:2, :] = g_pooled * (idx == 1)
    full[:, 1:2 * ho:2, 0:2 * wo:2, :] = g_pooled * (idx == 2)
    full[:, 1:2 * ho:2, 1:2 * wo:2, :] = g_pooled * (idx == 3)
    return full


def fc_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """J = W s_in + b, batched over leading axes."""
    if x.shape[-1] != weight.shape[1]:
        raise ValueError(f"fc input width {x.shape[-1]} != weight in-dim {weight.shape[1]}")
    if bias.shape != (weight.shape[0],):
        raise ValueError(f"bias shape {bias.shape} != ({weight.shape[0]},)")
    return x.astype(np.float64, copy=False) @ weight.T + bias


def remap_output(s: np.ndarray) -> np.ndarray:
    """{0,1} spikes -> {-1,1} motor directions via 2s - 1."""
    return 2.0 * np.asarray(s, dtype=np.float64) - 1.0

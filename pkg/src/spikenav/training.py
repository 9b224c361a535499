"""Training: windowed BPTT with Adam and MSE, session-level k-fold
cross-validation, and evaluation metrics including the spurious-flip rate.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .lif import SCALED, LIFParams
from .network import (NetworkModel, bptt_backward, forward_sequence,
                      init_params, save_weights)
from .session import Session, Window, make_windows


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 90
    batch_size: int = 16
    lr: float = 1e-3
    alpha: float = 0.6
    mode: str = "snn"
    window_len: int = 20
    seed: int = 0
    folds: int = 5
    input_scaling: str = SCALED

    def __post_init__(self):
        if min(self.epochs, self.batch_size, self.window_len, self.folds) < 1:
            raise ValueError("epochs, batch_size, window_len and folds must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.mode not in ("snn", "cnn"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def lif_params(self) -> LIFParams:
        return LIFParams(alpha=self.alpha, input_scaling=self.input_scaling)


class NanLossError(RuntimeError):
    """Training hit a non-finite loss; carries fold/epoch context."""


def mse_loss(pred: np.ndarray, labels: np.ndarray) -> float:
    """Mean over batch, timesteps and both channels of (label - pred)^2."""
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if pred.shape != labels.shape:
        raise ValueError(f"prediction shape {pred.shape} != labels {labels.shape}")
    return float(np.mean((labels - pred) ** 2))


def mse_loss_grad(pred: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """dL/dpred for the mean-squared error above."""
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    return 2.0 * (pred - labels) / pred.size


@dataclass
class AdamState:
    """First/second moments and step counter for one parameter set."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()})


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, lr: float) -> tuple[dict[str, np.ndarray], AdamState]:
    """Standard Adam update with bias correction; mutates nothing."""
    new_params = {}
    state = AdamState(m=dict(state.m), v=dict(state.v), step=state.step + 1,
                      beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    b1, b2 = state.beta1, state.beta2
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, expected {p.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError(f"non-finite gradient in tensor {name!r}")
        m = b1 * state.m[name] + (1 - b1) * g
        v = b2 * state.v[name] + (1 - b2) * g * g
        m_hat = m / (1 - b1 ** state.step)
        v_hat = v / (1 - b2 ** state.step)
        new_params[name] = p - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        state.m[name] = m
        state.v[name] = v
    return new_params, state


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train_session_ids: tuple[str, ...]
    test_session_ids: tuple[str, ...]


def kfold_split(session_ids: list[str], folds: int = 5,
                seed: int = 0) -> list[FoldSplit]:
    """Shuffle sessions and partition them into near-equal test groups.

    The split is at session level only, so no test window ever shares a
    session with its training set.
    """
    ids = list(session_ids)
    if len(ids) < folds:
        raise ValueError(f"need at least {folds} sessions, got {len(ids)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    shuffled = [ids[i] for i in order]
    groups = np.array_split(np.arange(len(ids)), folds)
    splits = []
    for fi, grp in enumerate(groups):
        test = tuple(shuffled[i] for i in grp)
        train = tuple(s for s in shuffled if s not in test)
        splits.append(FoldSplit(fold_index=fi, train_session_ids=train,
                                test_session_ids=test))
    return splits


@dataclass
class FoldResult:
    fold_index: int
    test_session_ids: tuple[str, ...]
    train_loss_per_epoch: list[float]
    test_loss: float
    flip_rate: float
    flip_rate_degenerate: bool


@dataclass
class TrainReport:
    config: TrainConfig
    folds: list[FoldResult]
    mean_test_loss: float
    std_test_loss: float
    mean_flip_rate: float

    def to_json(self) -> str:
        doc = {
            "config": asdict(self.config),
            "folds": [
                {
                    "fold": f.fold_index,
                    "test_sessions": list(f.test_session_ids),
                    "train_loss_per_epoch": f.train_loss_per_epoch,
                    "test_loss": f.test_loss,
                    "flip_rate": f.flip_rate,
                    "flip_rate_degenerate": f.flip_rate_degenerate,
                }
                for f in self.folds
            ],
            "mean_test_loss": self.mean_test_loss,
            "std_test_loss": self.std_test_loss,
            "mean_flip_rate": self.mean_flip_rate,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _stack_windows(windows: list[Window]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    frames = np.stack([w.frames for w in windows])
    kin = np.stack([w.kinematics for w in windows])
    labels = np.stack([w.labels for w in windows]).astype(np.float64)
    return frames, kin, labels


def kin_stats(sessions: list[Session]) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean/std of kinematics over all frames of the sessions.

    Channels with (near-)zero spread keep std 1 so a constant input maps to
    a constant zero instead of exploding.
    """
    all_kin = np.concatenate([s.kinematics_array() for s in sessions], axis=0)
    mean = all_kin.mean(axis=0)
    std = all_kin.std(axis=0)
    std = np.where(std < 1e-6, 1.0, std)
    return mean, std


def batch_loss_and_grads(model: NetworkModel, frames: np.ndarray, kin: np.ndarray,
                         labels: np.ndarray, probe: bool = False):
    """Forward a window batch, return (loss, gradient dict)."""
    trace = forward_sequence(model, frames, kin, probe=probe)
    loss = mse_loss(trace.outputs, labels)
    grads = bptt_backward(model, trace, mse_loss_grad(trace.outputs, labels))
    return loss, grads


def flip_rate_metric(outputs: np.ndarray, labels: np.ndarray) -> tuple[float, bool]:
    """Spurious-flip rate over window batches.

    outputs, labels: (B, T, 2) in {-1, 1} (continuous outputs are collapsed
    to their sign first). Counts, per channel, steps whose output changed
    while the label stayed constant, divided by the constant-label step
    count; the two channel rates are averaged. A zero denominator is
    reported as (0.0, degenerate=True).
    """
    out_sign = np.where(np.asarray(outputs, dtype=np.float64) >= 0.0, 1.0, -1.0)
    labels = np.asarray(labels, dtype=np.float64)
    rates = []
    degenerate = False
    for ch in range(out_sign.shape[2]):
        o, y = out_sign[:, :, ch], labels[:, :, ch]
        label_const = y[:, 1:] == y[:, :-1]
        flips = (o[:, 1:] != o[:, :-1]) & label_const
        denom = int(label_const.sum())
        if denom == 0:
            rates.append(0.0)
            degenerate = True
        else:
            rates.append(float(flips.sum()) / denom)
    return float(np.mean(rates)), degenerate


def evaluate_model(model: NetworkModel, sessions: list[Session],
                   window_len: int = 20):
    """Test loss, flip rate and per-step outputs over the sessions' windows."""
    windows = [w for s in sessions for w in make_windows(s, window_len)]
    if not windows:
        raise ValueError("no evaluation windows: sessions are empty or too short")
    frames, kin, labels = _stack_windows(windows)
    trace = forward_sequence(model, frames, kin)
    loss = mse_loss(trace.outputs, labels)
    rate, degenerate = flip_rate_metric(trace.outputs, labels)
    return loss, rate, degenerate, trace.outputs, labels


def train_fold(sessions: list[Session], split: FoldSplit, config: TrainConfig,
               weight_seed: int, shuffle_seed: int) -> tuple[NetworkModel, FoldResult]:
    by_id = {s.id: s for s in sessions}
    train_sessions = [by_id[i] for i in split.train_session_ids]
    test_sessions = [by_id[i] for i in split.test_session_ids]
    mean, std = kin_stats(train_sessions)
    lif = config.lif_params()
    gain = lif.input_gain if config.mode == "snn" else 1.0
    model = NetworkModel(mode=config.mode, lif=lif,
                         params=init_params(weight_seed, gain),
                         kin_mean=mean, kin_std=std)
    windows = [w for s in train_sessions for w in make_windows(s, config.window_len)]
    if not windows:
        raise ValueError("training fold has no full windows")
    frames, kin, labels = _stack_windows(windows)

    rng = np.random.default_rng(shuffle_seed)
    adam = AdamState.zeros_like(model.params)
    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(windows))
        epoch_losses = []
        for lo in range(0, len(windows), config.batch_size):
            idx = order[lo:lo + config.batch_size]
            loss, grads = batch_loss_and_grads(
                model, frames[idx], kin[idx], labels[idx])
            if not math.isfinite(loss):
                raise NanLossError(
                    f"non-finite loss {loss} in fold {split.fold_index}, "
                    f"epoch {epoch}, batch at {lo}")
            model.params, adam = adam_step(model.params, grads, adam, config.lr)
            epoch_losses.append(loss)
        losses.append(float(np.mean(epoch_losses)))

    test_loss, rate, degenerate, _, _ = evaluate_model(
        model, test_sessions, config.window_len)
    result = FoldResult(fold_index=split.fold_index,
                        test_session_ids=split.test_session_ids,
                        train_loss_per_epoch=losses, test_loss=test_loss,
                        flip_rate=rate, flip_rate_degenerate=degenerate)
    return model, result


def train_model(sessions: list[Session], config: TrainConfig,
                out_dir: str | os.PathLike | None = None
                ) -> tuple[NetworkModel, TrainReport]:
    """Full k-fold training; returns the best fold's model and the report.

    With out_dir set, also writes fold<k>.weights, report.json and
    train_curve.csv there.
    """
    if not sessions:
        raise ValueError("dataset is empty")
    splits = kfold_split([s.id for s in sessions], config.folds, config.seed)
    seed_seq = np.random.SeedSequence(config.seed)
    fold_seeds = seed_seq.generate_state(2 * config.folds)
    results, models = [], []
    for split in splits:
        model, result = train_fold(
            sessions, split, config,
            weight_seed=int(fold_seeds[2 * split.fold_index]),
            shuffle_seed=int(fold_seeds[2 * split.fold_index + 1]))
        results.append(result)
        models.append(model)

    test_losses = np.array([r.test_loss for r in results])
    # sample std (ddof=1): these fold losses feed Welch's t-test downstream
    std = float(test_losses.std(ddof=1)) if len(test_losses) > 1 else 0.0
    report = TrainReport(config=config, folds=results,
                         mean_test_loss=float(test_losses.mean()),
                         std_test_loss=std,
                         mean_flip_rate=float(np.mean([r.flip_rate for r in results])))
    best = int(np.argmin(test_losses))

    if out_dir is not None:
        out_dir = os.fspath(out_dir)
        os.makedirs(out_dir, exist_ok=True)
        for k, model in enumerate(models):
            save_weights(model, os.path.join(out_dir, f"fold{k}.weights"))
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8",
                  newline="\n") as f:
            f.write(report.to_json() + "\n")
        with open(os.path.join(out_dir, "train_curve.csv"), "w", encoding="utf-8",
                  newline="\n") as f:
            f.write("epoch,fold,loss\n")
            for r in results:
                for epoch, loss in enumerate(r.train_loss_per_epoch):
                    f.write(f"{epoch},{r.fold_index},{loss!r}\n")
    return models[best], report

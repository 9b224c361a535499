"""Membrane-decay sweep: retrain the full cross-validation per alpha and
compare mean test loss and spurious-flip rate across the grid."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .lif import SCALED, UNSCALED
from .session import Session
from .training import TrainConfig, train_model


@dataclass(frozen=True)
class AlphaEntry:
    alpha: float
    input_scaling: str
    mean_loss: float
    std_loss: float
    flip_rate: float


@dataclass
class SweepResult:
    entries: list[AlphaEntry]
    failures: dict[float, str]
    best_alpha: float


DEFAULT_ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 11))


def config_for_alpha(base: TrainConfig, alpha: float) -> TrainConfig:
    """alpha = 1 switches to the unscaled (integrate-and-fire) update, since
    the scaled update's (1 - alpha) input gain would zero all input there."""
    scaling = UNSCALED if alpha == 1.0 else SCALED
    return replace(base, alpha=alpha, input_scaling=scaling)


def alpha_sweep(sessions: list[Session], alphas: list[float],
                base_config: TrainConfig, jobs: int = 1) -> SweepResult:
    """Run the full k-fold training once per alpha.

    Sweep points are independent models, so with jobs > 1 they run
    concurrently; results are collected in grid order either way. A failed
    alpha is recorded in ``failures`` and skipped, not fatal.
    """
    if not alphas:
        raise ValueError("alpha grid is empty")
    for a in alphas:
        if not (0.0 < a <= 1.0):
            raise ValueError(f"alpha {a} outside (0, 1]")

    def run_one(a: float):
        cfg = config_for_alpha(base_config, a)
        _, report = train_model(sessions, cfg)
        return AlphaEntry(alpha=a, input_scaling=cfg.input_scaling,
                          mean_loss=report.mean_test_loss,
                          std_loss=report.std_test_loss,
                          flip_rate=report.mean_flip_rate)

    entries = []
    failures: dict[float, str] = {}
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(a, pool.submit(run_one, a)) for a in alphas]
            outcomes = [(a, f) for a, f in futures]
    else:
        outcomes = [(a, None) for a in alphas]
    for a, fut in outcomes:
        try:
            entries.append(fut.result() if fut is not None else run_one(a))
        except Exception as e:  # a diverged alpha should not kill the sweep
            failures[a] = f"{type(e).__name__}: {e}"
    if not entries:
        raise RuntimeError(f"every alpha failed: {failures}")
    best = entries[int(np.argmin([e.mean_loss for e in entries]))].alpha
    return SweepResult(entries=entries, failures=failures, best_alpha=best)

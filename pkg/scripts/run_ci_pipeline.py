#!/usr/bin/env python3
"""Desk-budget end-to-end run: generate the CI dataset, sweep three decay
settings, compare against the CNN baseline, and emit every report artifact.

Usage: python scripts/run_ci_pipeline.py [OUTDIR]  (default ./ci_run)
"""

import sys
import time
from dataclasses import replace
from pathlib import Path

from spikenav.flops import WORST_CASE, count_flops, measure_activity
from spikenav.network import save_weights
from spikenav.report import export_flops, export_outputs, export_sweep
from spikenav.session import load_dataset, make_windows
from spikenav.simgen import generate_dataset, scenario_families
from spikenav.stats import WelchInput, welch_t_test
from spikenav.sweep import alpha_sweep
from spikenav.training import TrainConfig, evaluate_model, train_model

import numpy as np

SEED = 7


def main() -> int:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "ci_run")
    data_dir = out / "data"
    t0 = time.time()

    print("generating dataset (6 scenario families x 2 sessions)")
    generate_dataset(scenario_families(base_seed=SEED), 2, str(data_dir))
    sessions = load_dataset(data_dir)
    print(f"  {len(sessions)} sessions, {sum(len(s) for s in sessions)} frames "
          f"[{time.time() - t0:.0f}s]")

    cfg = TrainConfig(epochs=20, folds=3, seed=SEED, mode="snn")
    print("sweeping membrane decay {0.3, 0.6, 1.0}")
    sweep = alpha_sweep(sessions, [0.3, 0.6, 1.0], cfg)
    export_sweep(sweep, out)
    for e in sweep.entries:
        print(f"  alpha={e.alpha:g} ({e.input_scaling}): loss={e.mean_loss:.4f} "
              f"+/-{e.std_loss:.4f}, flip={e.flip_rate:.4f}")
    print(f"  best alpha {sweep.best_alpha:g} [{time.time() - t0:.0f}s]")

    print("training the CNN baseline on the same folds")
    cnn_model, cnn_rep = train_model(sessions, replace(cfg, mode="cnn"))
    print(f"  cnn loss={cnn_rep.mean_test_loss:.4f} +/-{cnn_rep.std_test_loss:.4f}")

    snn = next(e for e in sweep.entries if e.alpha == 0.6)
    welch = welch_t_test(WelchInput(
        mu1=snn.mean_loss, sigma1=snn.std_loss, n1=cfg.folds,
        mu2=cnn_rep.mean_test_loss, sigma2=cnn_rep.std_test_loss, n2=cfg.folds))
    print(f"  Welch snn@0.6 vs cnn: t={welch.t_value:.3f}, p={welch.p_value:.4f}")

    print("training the reported model at alpha=0.6 and exporting artifacts")
    model, rep = train_model(sessions, cfg, out_dir=out / "snn_a0.6")
    save_weights(model, out / "best.weights")
    loss, rate, _, outputs, labels = evaluate_model(model, sessions[:2])
    export_outputs(outputs, labels, out)

    windows = [w for s in sessions[:2] for w in make_windows(s)]
    frames = np.stack([w.frames for w in windows])
    kin = np.stack([w.kinematics for w in windows])
    export_flops(count_flops(model, measure_activity(model, frames, kin)), out)
    worst = count_flops(model, WORST_CASE)
    print(f"  flops: worst-case cnn {worst.cnn_total:.3e}")
    print(f"done in {time.time() - t0:.0f}s; artifacts under {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())

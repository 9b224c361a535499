#!/usr/bin/env python3
"""Full-scale run mirroring the original protocol: 38 sessions over six wall
configurations, 5-fold cross-validation, 90 epochs, full decay grid.

This takes hours of CPU. Usage:
    python scripts/run_paper_pipeline.py [OUTDIR] [--alphas 0.1,...,1.0]
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from spikenav.report import export_sweep
from spikenav.session import load_dataset
from spikenav.simgen import generate_dataset, balanced_counts, scenario_families
from spikenav.stats import WelchInput, welch_t_test
from spikenav.sweep import DEFAULT_ALPHAS, alpha_sweep
from spikenav.training import TrainConfig, train_model

SEED = 7


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="paper_run")
    ap.add_argument("--alphas", default=",".join(str(a) for a in DEFAULT_ALPHAS))
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    alphas = [float(v) for v in args.alphas.split(",") if v]
    t0 = time.time()

    print("generating dataset (38 sessions over 6 families)")
    families = scenario_families(base_seed=SEED)
    generate_dataset(families, balanced_counts(38, len(families)), str(out / "data"))
    sessions = load_dataset(out / "data")
    reached = sum(bool(s.goal_reached) for s in sessions)
    print(f"  {len(sessions)} sessions ({reached} reached goal) "
          f"[{time.time() - t0:.0f}s]")

    cfg = TrainConfig(epochs=90, folds=5, seed=SEED, mode="snn")
    print(f"sweeping alphas {alphas} (this is the long part)")
    sweep = alpha_sweep(sessions, alphas, cfg, jobs=args.jobs)
    export_sweep(sweep, out)
    for e in sweep.entries:
        print(f"  alpha={e.alpha:g}: loss={e.mean_loss:.4f} +/-{e.std_loss:.4f} "
              f"flip={e.flip_rate:.4f}")
    print(f"  best alpha {sweep.best_alpha:g} [{time.time() - t0:.0f}s]")

    print("CNN baseline")
    _, cnn_rep = train_model(sessions, replace(cfg, mode="cnn"))
    best = next(e for e in sweep.entries if e.alpha == sweep.best_alpha)
    welch = welch_t_test(WelchInput(
        mu1=best.mean_loss, sigma1=best.std_loss, n1=cfg.folds,
        mu2=cnn_rep.mean_test_loss, sigma2=cnn_rep.std_test_loss, n2=cfg.folds))
    print(f"  cnn loss={cnn_rep.mean_test_loss:.4f} +/-{cnn_rep.std_test_loss:.4f}")
    print(f"  Welch best-snn vs cnn: t={welch.t_value:.3f}, p={welch.p_value:.4f}")
    print(f"done in {(time.time() - t0) / 60:.0f} min; artifacts under {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())

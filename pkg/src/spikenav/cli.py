"""Command-line interface.

Subcommands: gen, rasterize, train, eval, sweep, stats, flops, report.
Exit codes: 0 success, 1 usage error, 2 runtime failure. SPIKENAV_SEED
serves as the seed when --seed is not given.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import report as report_mod
from .flops import WORST_CASE, count_flops, measure_activity
from .lif import SCALED, UNSCALED
from .network import load_weights
from .session import load_dataset, load_session, make_windows
from .simgen import generate_dataset, balanced_counts, scenario_families
from .stats import WelchInput, welch_t_test
from .sweep import alpha_sweep
from .training import TrainConfig, evaluate_model, train_model

PRESETS = {
    # epochs, folds, sessions per scenario recipe
    "paper": {"epochs": 90, "folds": 5, "total_sessions": 38},
    "ci": {"epochs": 20, "folds": 3, "total_sessions": 12},
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors instead of argparse's 2
        raise _UsageError(message)


def _seed_of(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SPIKENAV_SEED")
    return int(env) if env else 0


def _train_config(args) -> TrainConfig:
    preset = PRESETS.get(getattr(args, "preset", None) or "", {})
    epochs = args.epochs if args.epochs is not None else preset.get("epochs", 90)
    folds = args.folds if args.folds is not None else preset.get("folds", 5)
    return TrainConfig(
        epochs=epochs,
        batch_size=args.batch,
        lr=args.lr,
        alpha=args.alpha,
        mode=args.model,
        window_len=args.window,
        seed=_seed_of(args),
        folds=folds,
        input_scaling=args.input_scaling,
    )


def _add_train_flags(p):
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--model", choices=("snn", "cnn"), default="snn")
    p.add_argument("--input-scaling", choices=(SCALED, UNSCALED), default=SCALED)
    p.add_argument("--window", type=int, default=20)
    p.add_argument("--preset", choices=tuple(PRESETS), default=None)


def _cmd_gen(args) -> int:
    seed = _seed_of(args)
    scenarios = scenario_families(base_seed=seed)[: args.scenarios]
    if not scenarios:
        raise ValueError("--scenarios must be >= 1")
    if args.preset:
        total = PRESETS[args.preset]["total_sessions"]
        counts = balanced_counts(total, len(scenarios))
    else:
        counts = [args.per] * len(scenarios)
    rel = generate_dataset(scenarios, counts, args.out,
                           max_frames=args.max_frames,
                           kin_noise_sigma=args.kin_noise)
    print(f"wrote {len(rel)} sessions to {args.out}")
    return 0


def _cmd_rasterize(args) -> int:
    s = load_session(args.session)
    frames = s.spike_frames()
    np.savez_compressed(args.out, frames=frames)
    print(f"rasterized {len(s)} frames ({int(frames.sum())} spikes) -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    sessions = load_dataset(args.data)
    config = _train_config(args)
    model, rep = train_model(sessions, config, out_dir=args.out)
    print(f"mean test loss {rep.mean_test_loss:.4f} "
          f"(std {rep.std_test_loss:.4f}), flip rate {rep.mean_flip_rate:.4f}")
    print(f"fold weights and report written to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = load_weights(args.model)
    sessions = load_dataset(args.data)
    loss, rate, degenerate, outputs, labels = evaluate_model(model, sessions, args.window)
    if args.out:
        report_mod.export_outputs(outputs, labels, args.out)
    flag = " (degenerate denominator)" if degenerate else ""
    print(f"test loss {loss:.4f}, flip rate {rate:.4f}{flag}")
    return 0


def _cmd_sweep(args) -> int:
    sessions = load_dataset(args.data)
    config = _train_config(args)
    alphas = [float(v) for v in args.alphas.split(",") if v]
    result = alpha_sweep(sessions, alphas, config, jobs=args.jobs)
    report_mod.export_sweep(result, args.out)
    for e in result.entries:
        print(f"alpha={e.alpha:g} loss={e.mean_loss:.4f}"
              f" std={e.std_loss:.4f} flip={e.flip_rate:.4f}")
    for a, msg in result.failures.items():
        print(f"alpha={a:g} FAILED: {msg}", file=sys.stderr)
    print(f"best alpha {result.best_alpha:g}; artifacts in {args.out}")
    return 0


def _cmd_stats(args) -> int:
    res = welch_t_test(WelchInput(mu1=args.mu1, sigma1=args.sd1, n1=args.n1,
                                  mu2=args.mu2, sigma2=args.sd2, n2=args.n2))
    print(f"t={abs(res.t_value):.3f}, p={res.p_value:.4f} "
          f"(dof={res.dof:.4f}, signed t={res.t_value:.6f})")
    return 0


def _cmd_flops(args) -> int:
    model = load_weights(args.model)
    if args.data:
        sessions = load_dataset(args.data)
        windows = [w for s in sessions for w in make_windows(s, args.window)]
        if not windows:
            raise ValueError("no full windows in dataset for activity measurement")
        frames = np.stack([w.frames for w in windows])
        kin = np.stack([w.kinematics for w in windows])
        activity = measure_activity(model, frames, kin)
    else:
        activity = WORST_CASE
    rep = count_flops(model, activity)
    if args.out:
        report_mod.export_flops(rep, args.out)
    print(f"cnn {rep.cnn_total} flops, snn {rep.snn_total:.0f} flops per inference")
    return 0


def _cmd_report(args) -> int:
    out = args.out or args.run
    made = []
    sweep_csv = os.path.join(args.run, "sweep.csv")
    if os.path.exists(sweep_csv):
        report_mod.export_sweep(report_mod.read_sweep_csv(sweep_csv), out)
        made.append("sweep")
    if not made:
        raise ValueError(f"nothing to render under {args.run} (no sweep.csv)")
    print(f"rendered {', '.join(made)} into {out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="spikenav",
                     description="LIDAR spiking-network obstacle avoidance toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--scenarios", type=int, default=6)
    p.add_argument("--per", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--preset", choices=tuple(PRESETS), default=None)
    p.add_argument("--max-frames", type=int, default=250)
    p.add_argument("--kin-noise", type=float, default=0.01)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("rasterize", help="rasterize one session's scans to spike frames")
    p.add_argument("--session", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rasterize)

    p = sub.add_parser("train", help="k-fold training run")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a weights file on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--window", type=int, default=20)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="membrane-decay sweep")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alphas", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--jobs", type=int, default=1)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("stats", help="Welch's t-test from summary statistics")
    for flag in ("--mu1", "--sd1", "--mu2", "--sd2"):
        p.add_argument(flag, type=float, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("flops", help="FLOPs accounting for a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--window", type=int, default=20)
    p.set_defaults(func=_cmd_flops)

    p = sub.add_parser("report", help="re-render plots from stored CSVs")
    p.add_argument("--run", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

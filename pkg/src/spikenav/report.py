"""CSV and SVG artifact writers.

Plots are emitted as small self-contained SVG files written directly by
this module; numbers in CSVs use shortest round-trip formatting so parsing
a file reconstructs the values exactly.
"""

from __future__ import annotations

import os

import numpy as np

from .flops import FlopsReport
from .lif import SCALED, UNSCALED
from .sweep import AlphaEntry, SweepResult


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- CSV

def write_sweep_csv(result: SweepResult, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("alpha,mean_loss,std_loss,flip_rate\n")
        for e in result.entries:
            f.write(f"{_fmt(e.alpha)},{_fmt(e.mean_loss)},"
                    f"{_fmt(e.std_loss)},{_fmt(e.flip_rate)}\n")


def read_sweep_csv(path: str | os.PathLike) -> SweepResult:
    entries = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != "alpha,mean_loss,std_loss,flip_rate":
            raise ValueError(f"{path}: unexpected sweep header {header!r}")
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            a, m, s, r = (float(v) for v in line.split(","))
            entries.append(AlphaEntry(alpha=a,
                                      input_scaling=UNSCALED if a == 1.0 else SCALED,
                                      mean_loss=m, std_loss=s, flip_rate=r))
    if not entries:
        raise ValueError(f"{path}: no sweep rows")
    best = entries[int(np.argmin([e.mean_loss for e in entries]))].alpha
    return SweepResult(entries=entries, failures={}, best_alpha=best)


def write_outputs_csv(outputs: np.ndarray, labels: np.ndarray,
                      path: str | os.PathLike) -> None:
    """Per-step predicted vs label channels; windows are concatenated in order."""
    outputs = np.asarray(outputs, dtype=np.float64).reshape(-1, 2)
    labels = np.asarray(labels, dtype=np.float64).reshape(-1, 2)
    if outputs.shape != labels.shape:
        raise ValueError("outputs and labels disagree in shape")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("k,label_r,label_l,pred_r,pred_l\n")
        for k, (lab, pred) in enumerate(zip(labels, outputs)):
            f.write(f"{k},{_fmt(lab[0])},{_fmt(lab[1])},"
                    f"{_fmt(pred[0])},{_fmt(pred[1])}\n")


def write_flops_csv(report: FlopsReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("layer,kind,cnn_macs,cnn_flops,snn_input_events,"
                "snn_synaptic_flops,snn_update_flops,snn_flops\n")
        for l in report.layers:
            f.write(f"{l.name},{l.kind},{l.cnn_macs},{l.cnn_flops},"
                    f"{_fmt(l.snn_input_events)},{_fmt(l.snn_synaptic_flops)},"
                    f"{l.snn_update_flops},{_fmt(l.snn_flops)}\n")
        f.write(f"total,,,{report.cnn_total},,,,{_fmt(report.snn_total)}\n")
        f.write(f"# assumptions: {report.assumptions}\n")


# ---------------------------------------------------------------- SVG

_W, _H = 640, 400
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _scale(vals, lo, hi, out_lo, out_hi):
    span = hi - lo if hi > lo else 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in vals]


def _axes(title: str, xlabel: str, ylabel: str, xlo, xhi, ylo, yhi) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" stroke="black"/>',
        f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = xlo + frac * (xhi - xlo)
        yv = ylo + frac * (yhi - ylo)
        xpix = _ML + frac * (_W - _ML - _MR)
        ypix = _H - _MB - frac * (_H - _MT - _MB)
        parts.append(f'<text x="{xpix:.1f}" y="{_H - _MB + 16}" '
                     f'text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{_ML - 6}" y="{ypix + 4:.1f}" '
                     f'text-anchor="end">{yv:.3g}</text>')
    return parts


def svg_line_plot(x, ys: dict[str, list[float]], path, title="", xlabel="",
                  ylabel="", yerr: dict[str, list[float]] | None = None) -> None:
    """Multi-series line plot with optional error bars."""
    colors = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")
    all_y = [v for series in ys.values() for v in series]
    if yerr:
        all_y += [v + e for s in ys for v, e in zip(ys[s], yerr.get(s, [0] * len(x)))]
        all_y += [v - e for s in ys for v, e in zip(ys[s], yerr.get(s, [0] * len(x)))]
    xlo, xhi = min(x), max(x)
    ylo, yhi = min(all_y), max(all_y)
    if ylo == yhi:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    parts = _axes(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    for ci, (name, series) in enumerate(ys.items()):
        color = colors[ci % len(colors)]
        xs = _scale(x, xlo, xhi, _ML, _W - _MR)
        yy = _scale(series, ylo, yhi, _H - _MB, _MT)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, yy))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for a, b in zip(xs, yy):
            parts.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>')
        if yerr and name in yerr:
            for a, v, e in zip(xs, series, yerr[name]):
                y1 = _scale([v - e], ylo, yhi, _H - _MB, _MT)[0]
                y2 = _scale([v + e], ylo, yhi, _H - _MB, _MT)[0]
                parts.append(f'<line x1="{a:.2f}" y1="{y1:.2f}" x2="{a:.2f}" '
                             f'y2="{y2:.2f}" stroke="{color}" stroke-width="1"/>')
        parts.append(f'<text x="{_W - _MR - 4}" y="{_MT + 14 + 16 * ci}" '
                     f'text-anchor="end" fill="{color}">{name}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(parts) + "\n")


def svg_bar_chart(names: list[str], groups: dict[str, list[float]], path,
                  title="", ylabel="") -> None:
    """Grouped bar chart (one group color per series), log-free linear scale."""
    colors = ("#1f77b4", "#d62728")
    all_v = [v for series in groups.values() for v in series]
    ylo, yhi = 0.0, max(all_v) * 1.05 if all_v else 1.0
    parts = _axes(title, "", ylabel, 0, len(names), ylo, yhi)
    n_groups = len(groups)
    slot = (_W - _ML - _MR) / max(len(names), 1)
    bar_w = slot * 0.8 / max(n_groups, 1)
    for gi, (gname, series) in enumerate(groups.items()):
        color = colors[gi % len(colors)]
        for i, v in enumerate(series):
            x = _ML + i * slot + slot * 0.1 + gi * bar_w
            top = _scale([v], ylo, yhi, _H - _MB, _MT)[0]
            parts.append(f'<rect x="{x:.2f}" y="{top:.2f}" width="{bar_w:.2f}" '
                         f'height="{_H - _MB - top:.2f}" fill="{color}"/>')
        parts.append(f'<text x="{_W - _MR - 4}" y="{_MT + 14 + 16 * gi}" '
                     f'text-anchor="end" fill="{color}">{gname}</text>')
    for i, name in enumerate(names):
        x = _ML + (i + 0.5) * slot
        parts.append(f'<text x="{x:.1f}" y="{_H - _MB + 30}" '
                     f'text-anchor="middle" font-size="10">{name}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(parts) + "\n")


def export_sweep(result: SweepResult, out_dir: str | os.PathLike) -> None:
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    write_sweep_csv(result, os.path.join(out_dir, "sweep.csv"))
    alphas = [e.alpha for e in result.entries]
    svg_line_plot(alphas,
                  {"test loss": [e.mean_loss for e in result.entries]},
                  os.path.join(out_dir, "sweep.svg"),
                  title="Test loss vs membrane decay",
                  xlabel="alpha", ylabel="MSE test loss",
                  yerr={"test loss": [e.std_loss for e in result.entries]})
    svg_line_plot(alphas,
                  {"flip rate": [e.flip_rate for e in result.entries]},
                  os.path.join(out_dir, "flip_rate.svg"),
                  title="Spurious-flip rate vs membrane decay",
                  xlabel="alpha", ylabel="flip rate")


def export_outputs(outputs: np.ndarray, labels: np.ndarray,
                   out_dir: str | os.PathLike) -> None:
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    write_outputs_csv(outputs, labels, os.path.join(out_dir, "outputs_vs_labels.csv"))
    o = np.asarray(outputs, dtype=np.float64).reshape(-1, 2)
    l = np.asarray(labels, dtype=np.float64).reshape(-1, 2)
    n = min(len(o), 400)  # keep the plot legible
    ks = list(range(n))
    for ch, name in ((0, "right"), (1, "left")):
        svg_line_plot(ks,
                      {"label": list(l[:n, ch]), "prediction": list(o[:n, ch])},
                      os.path.join(out_dir, f"outputs_{name}.svg"),
                      title=f"{name} motor channel: prediction vs label",
                      xlabel="timestep k", ylabel="command")


def export_flops(report: FlopsReport, out_dir: str | os.PathLike) -> None:
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    write_flops_csv(report, os.path.join(out_dir, "flops.csv"))
    names = [l.name for l in report.layers] + ["total"]
    svg_bar_chart(names,
                  {"cnn": [float(l.cnn_flops) for l in report.layers] + [float(report.cnn_total)],
                   "snn": [l.snn_flops for l in report.layers] + [report.snn_total]},
                  os.path.join(out_dir, "flops.svg"),
                  title="FLOPs per inference", ylabel="FLOPs")


def export_report(out_dir: str | os.PathLike,
                  sweep: SweepResult | None = None,
                  outputs: np.ndarray | None = None,
                  labels: np.ndarray | None = None,
                  flops: FlopsReport | None = None) -> list[str]:
    """Write every provided result's CSV and plot artifacts under out_dir.

    Returns the artifact kinds written, for logging.
    """
    made = []
    if sweep is not None:
        export_sweep(sweep, out_dir)
        made.append("sweep")
    if outputs is not None:
        if labels is None:
            raise ValueError("outputs require labels")
        export_outputs(outputs, labels, out_dir)
        made.append("outputs")
    if flops is not None:
        export_flops(flops, out_dir)
        made.append("flops")
    if not made:
        raise ValueError("nothing to export")
    return made

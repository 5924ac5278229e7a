"""Optional PNG rendering of the CSV outputs (requires matplotlib)."""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("figures need matplotlib: pip install 'artifact[plot]'") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_class_lengths(stats_csv, out_png) -> Path:
    """Min-max bars with mean markers per class, one panel per gate column."""
    plt = _pyplot()
    by_gate = defaultdict(list)
    for r in _rows(stats_csv):
        by_gate[r["gate"]].append(r)
    fig, axes = plt.subplots(len(by_gate), 1, figsize=(8, 2.4 * len(by_gate)), squeeze=False)
    for ax, (gate, rows) in zip(axes[:, 0], by_gate.items()):
        xs = range(len(rows))
        ax.vlines(xs, [int(r["min"]) for r in rows], [int(r["max"]) for r in rows], lw=4, color="tab:blue")
        ax.plot(xs, [float(r["mean"]) for r in rows], "kx")
        ax.set_ylabel(f"{gate} pulses")
        ax.set_xticks(list(xs))
        ax.set_xticklabels([str(i) for i in xs])
    axes[-1, 0].set_xlabel("class index")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return Path(out_png)


def plot_schedule_summary(summary_csv, out_png) -> Path:
    plt = _pyplot()
    rows = _rows(summary_csv)
    layouts = list(dict.fromkeys(r["layout"] for r in rows))
    rules = list(dict.fromkeys(r["rule"] for r in rows))
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(10, 3.5))
    avg = {r["layout"]: float(r["avg_pulses_per_cx"]) for r in rows}
    a1.bar(layouts, [avg[n] for n in layouts], color="tab:gray")
    a1.set_ylabel("pulses per CX")
    width = 0.8 / max(len(rules), 1)
    for k, rule in enumerate(rules):
        d = {r["layout"]: int(r["duration_steps"]) for r in rows if r["rule"] == rule}
        a2.bar([i + k * width for i in range(len(layouts))], [d.get(n, 0) for n in layouts], width, label=rule)
    a2.set_xticks([i + width * (len(rules) - 1) / 2 for i in range(len(layouts))])
    a2.set_xticklabels(layouts)
    a2.set_ylabel("round duration (steps)")
    a2.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return Path(out_png)


def plot_noise_sweep(noise_csv, out_png, sweep: str = "t2-ratio") -> Path:
    plt = _pyplot()
    rows = _rows(noise_csv)
    key = "t_pulse_over_T2" if sweep == "t2-ratio" else "delta_J"
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.loglog([float(r[key]) for r in rows], [float(r["infidelity"]) for r in rows], "o-")
    ax.set_xlabel(key)
    ax.set_ylabel("infidelity")
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return Path(out_png)


def plot_length_vs_infidelity(csv_path, out_png) -> Path:
    plt = _pyplot()
    rows = _rows(csv_path)
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    for router, style in (("optimal", "s"), ("greedy", "^")):
        sel = [r for r in rows if r["router"] == router]
        ax.semilogy([int(r["pulse_count"]) for r in sel], [float(r["infidelity"]) for r in sel], style,
                    label=router, mfc="none" if router == "greedy" else None)
    ax.set_xlabel("pulse count")
    ax.set_ylabel("infidelity")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=120)
    plt.close(fig)
    return Path(out_png)

#!/usr/bin/env python3
"""Plots the CSVs written by `narrm sweep`, `narrm calibrate` and `narrm train`.

    python scripts/plot_figures.py out/ [--save figs/]
"""
import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def per_target(ax, rows, ylabel, logy):
    eps = [float(r["eps_target"]) for r in rows]
    for name in rows[0]:
        if name == "eps_target":
            continue
        ys = [float(r[name]) for r in rows]
        if logy:
            # zero outage has no place on a log axis
            pts = [(e, y) for e, y in zip(eps, ys) if y > 0]
            if not pts:
                continue
            eps_n, ys = zip(*pts)
        else:
            eps_n = eps
        ax.plot(eps_n, ys, marker="o", label=name)
    ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
        ax.plot(eps, eps, "k--", lw=0.8, label="target")
    ax.set_xlabel("target BLER")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("run_dir", type=Path)
    ap.add_argument("--save", type=Path, default=None, help="output directory (default: run_dir)")
    args = ap.parse_args()
    out = args.save or args.run_dir
    out.mkdir(parents=True, exist_ok=True)

    ru, outage = args.run_dir / "fig_ru_vs_target.csv", args.run_dir / "fig_outage_vs_target.csv"
    if ru.exists() and outage.exists():
        fig, axes = plt.subplots(1, 2, figsize=(11, 4))
        per_target(axes[0], read(ru), "mean channel uses", logy=False)
        per_target(axes[1], read(outage), "outage probability", logy=True)
        fig.tight_layout()
        fig.savefig(out / "sweep.png", dpi=130)

    for cal in sorted(args.run_dir.glob("calibration_*.csv")):
        rows = read(cal)
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for label, ru_key, out_key in (("nar", "nar_ru", "nar_outage"), ("baseline", "baseline_ru", "baseline_outage")):
            ax.scatter([float(r[ru_key]) for r in rows], [max(float(r[out_key]), 1e-7) for r in rows], label=label)
        for r in rows:
            ax.annotate(f"eps={r['eps_target']}, a={float(r['alpha']):.3g}",
                        (float(r["nar_ru"]), max(float(r["nar_outage"]), 1e-7)), fontsize=7)
        ax.set_yscale("log")
        ax.set_xlabel("mean channel uses")
        ax.set_ylabel("outage probability")
        ax.set_title(cal.stem)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out / f"{cal.stem}.png", dpi=130)

    pred = args.run_dir / "test_predictions.csv"
    if pred.exists():
        rows = read(pred)[:400]
        fig, ax = plt.subplots(figsize=(9, 3.5))
        ax.plot([int(r["t"]) for r in rows], [float(r["actual"]) for r in rows], lw=1, label="actual")
        ax.plot([int(r["t"]) for r in rows], [float(r["predicted"]) for r in rows], lw=1, label="predicted")
        ax.set_xlabel("t")
        ax.set_ylabel("interference power")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(out / "predictions.png", dpi=130)


if __name__ == "__main__":
    main()

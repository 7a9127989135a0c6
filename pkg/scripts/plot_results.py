"""Error, movement and discard plots from a results directory.

    python3 scripts/plot_results.py results/desk
"""

import csv
import glob
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def load(path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}


def main(out_dir):
    curves = {}
    for path in sorted(glob.glob(os.path.join(out_dir, "iterations_*.csv"))):
        label = os.path.basename(path)[len("iterations_"):-4].upper()
        curves[label] = load(path)

    fig, axes = plt.subplots(3, 1, figsize=(7, 9), sharex=True)
    for label, c in curves.items():
        style = "--" if label.endswith("-CN") else "-"
        axes[0].plot(c["iteration"], c["pos_err_mm_mean"], style, label=label)
        axes[1].plot(c["iteration"], c["rot_err_deg_mean"], style, label=label)
        axes[2].plot(c["iteration"], c["cum_move_deg_mean"], style, label=label)
    axes[0].set_ylabel("position error [mm]")
    axes[1].set_ylabel("orientation error [deg]")
    axes[2].set_ylabel("accumulated movement [deg]")
    axes[2].set_xlabel("iteration")
    for ax in axes[:2]:
        ax.set_yscale("log")
    axes[0].legend(ncol=2, fontsize=8)
    fig.tight_layout()
    target = os.path.join(out_dir, "curves.png")
    fig.savefig(target, dpi=120)

    with open(os.path.join(out_dir, "summary.csv"), encoding="utf-8") as fh:
        summary = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.bar([r["method"] for r in summary], [float(r["discarded_mean"]) for r in summary],
           yerr=[float(r["discarded_std"]) for r in summary])
    ax.set_ylabel("discarded samples")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "discards.png"), dpi=120)
    print(f"wrote {target} and discards.png")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "results/desk")

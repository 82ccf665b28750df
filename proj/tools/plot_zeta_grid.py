#!/usr/bin/env python3
"""Heatmap of |zeta| from a zeta_grid.csv written by `diracflow zeta circle-graph --grid`."""

import argparse
import csv
import math

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--out", default="zeta_grid.png")
    ap.add_argument("--clip", type=float, default=10.0, help="cap |zeta| for display")
    args = ap.parse_args()

    with open(args.csv_path) as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1:]
    idx = {name: i for i, name in enumerate(header)}
    re = sorted({float(r[idx["re_s"]]) for r in data})
    im = sorted({float(r[idx["im_s"]]) for r in data})
    grid = np.full((len(im), len(re)), math.nan)
    re_pos = {v: i for i, v in enumerate(re)}
    im_pos = {v: i for i, v in enumerate(im)}
    for r in data:
        val = min(float(r[idx["abs_zeta"]]), args.clip)
        grid[im_pos[float(r[idx["im_s"]])], re_pos[float(r[idx["re_s"]])]] = val

    fig, ax = plt.subplots(figsize=(6, 8))
    mesh = ax.pcolormesh(re, im, grid, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=f"|zeta| (clipped at {args.clip:g})")
    ax.set_xlabel("Re s")
    ax.set_ylabel("Im s")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Plot the observer series written by `diracflow flow` (observers.csv)."""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1:]
    cols = {name: [float(r[i]) for r in data] for i, name in enumerate(header)}
    return header, cols


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv_path")
    ap.add_argument("-o", "--out", default="observers.png")
    ap.add_argument("--log", action="store_true", help="log scale for the value axis")
    args = ap.parse_args()

    header, cols = load(args.csv_path)
    t = cols[header[0]]
    fig, ax = plt.subplots(figsize=(8, 5))
    for name in header[1:]:
        ax.plot(t, cols[name], label=name, lw=1.2)
    if args.log:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

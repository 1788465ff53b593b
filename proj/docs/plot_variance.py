#!/usr/bin/env python3
"""Plot sigma^2(t) and the fitted power law from a qdiff run directory.

Usage: plot_variance.py RUN_DIR [OUT.png]
"""
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> None:
    run = Path(sys.argv[1])
    out = Path(sys.argv[2]) if len(sys.argv) > 2 else run / "variance.png"

    with open(run / "plot.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    log_t = [float(r["log10_t"]) for r in rows]
    log_s2 = [float(r["log10_sigma2"]) for r in rows]
    log_fit = [float(r["log10_fit"]) for r in rows]

    meta = json.loads((run / "metadata.json").read_text())
    fit = meta["results"]["fit"]

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(log_t, log_s2, "o", ms=3, label=r"$\sigma^2(t)$")
    lo, hi = fit["window"]
    in_win = [(x, y) for x, y in zip(log_t, log_fit) if lo <= 10**x <= hi]
    ax.plot(*zip(*in_win), "-", lw=1.5,
            label=rf"fit $\nu={fit['nu']:.3f}$ ({fit['regime']})")
    ax.set_xlabel(r"$\log_{10} t$")
    ax.set_ylabel(r"$\log_{10} \sigma^2$")
    kind = meta["config"]["model"]["kind"]
    gamma = meta["config"]["gamma"]
    ax.set_title(f"{kind}, $\\Gamma$ = {gamma}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()

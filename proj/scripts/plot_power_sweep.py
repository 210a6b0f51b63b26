#!/usr/bin/env python3
"""Sweep the per-drone amplifier cap and plot the three headline metrics.

Produces one figure with three panels against the cap in dBm: mean minimum
user throughput, mean energy draw, and mean energy efficiency, one line per
user count. Expect roughly a minute per (value, seed, count) episode at the
default shape.

    ./scripts/plot_power_sweep.py --bin build/uavd2d --users 40,100 --seeds 3
"""

import argparse
import pathlib
import subprocess
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", default="build/uavd2d")
    ap.add_argument("--values", default="25:42:1", help="cap sweep in dBm, A:B:STEP")
    ap.add_argument("--users", default="40,100", help="total user counts, comma separated")
    ap.add_argument("--uavs", type=int, default=5)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--slots", type=int, default=10)
    ap.add_argument("--out", default="plots")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "power-sweep-data"
    subprocess.run(
        [args.bin, "sweep", "--param", "pl-dbm", "--values", args.values,
         "--users", args.users, "--seeds", str(args.seeds), "--seed", str(args.seed),
         "--synthesize", f"10,10,{args.uavs}", "--slots", str(args.slots),
         "--mode", "proposed", "--out", str(data)],
        check=True)

    sweep_dir = next(data.iterdir())
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    panels = [
        ("mean_min_rate_bit_s", "sd_min_rate", "min user throughput (bit/s)"),
        ("mean_energy_j_per_s", "sd_energy", "energy draw (J/s)"),
        ("mean_efficiency_bit_per_j", "sd_efficiency", "energy efficiency (bit/J)"),
    ]
    for count in args.users.split(","):
        rows = pd.read_csv(sweep_dir / f"sweep-u{count}.csv")
        for ax, (mean_col, sd_col, label) in zip(axes, panels):
            ax.errorbar(rows.value, rows[mean_col], yerr=rows[sd_col],
                        marker="o", markersize=3, capsize=2, label=f"{count} users")
            ax.set_xlabel("amplifier cap (dBm)")
            ax.set_ylabel(label)
            ax.grid(alpha=0.3)
    axes[0].legend()
    fig.tight_layout()
    target = out / "power_sweep.png"
    fig.savefig(target, dpi=150)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

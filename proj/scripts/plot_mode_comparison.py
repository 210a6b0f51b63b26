#!/usr/bin/env python3
"""Compare optimized against equal-split allocation over the amplifier cap.

One panel: mean energy efficiency with error bars for both modes, swept over
the per-drone amplifier cap in dBm.

    ./scripts/plot_mode_comparison.py --bin build/uavd2d --seeds 5
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
    ap.add_argument("--synthesize", default="20,20,5", help="N,M,L instance shape")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--slots", type=int, default=10)
    ap.add_argument("--out", default="plots")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "mode-comparison-data"
    subprocess.run(
        [args.bin, "sweep", "--param", "pl-dbm", "--values", args.values,
         "--seeds", str(args.seeds), "--seed", str(args.seed),
         "--synthesize", args.synthesize, "--slots", str(args.slots),
         "--mode", "both", "--out", str(data)],
        check=True)

    sweep_dir = next(data.iterdir())
    rows = pd.read_csv(sweep_dir / "sweep.csv")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for mode, style in (("proposed", "-o"), ("uniform", "--s")):
        part = rows[rows["mode"] == mode]
        ax.errorbar(part.value, part.mean_efficiency_bit_per_j, yerr=part.sd_efficiency,
                    fmt=style, markersize=4, capsize=2, label=mode)
    ax.set_xlabel("amplifier cap (dBm)")
    ax.set_ylabel("energy efficiency (bit/J)")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    target = out / "mode_comparison.png"
    fig.savefig(target, dpi=150)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

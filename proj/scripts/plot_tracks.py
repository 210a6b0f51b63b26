#!/usr/bin/env python3
"""Draw drone tracks and user positions for one episode.

Runs the simulator, then plots the region with the charging station, every
drone's per-slot waypoints, and the user pairs at the first and last slot.

    ./scripts/plot_tracks.py --bin build/uavd2d --synthesize 20,20,5 --seed 1
"""

import argparse
import json
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
    ap.add_argument("--scenario", help="scenario JSON; omit to synthesize")
    ap.add_argument("--synthesize", default="20,20,5", help="N,M,L when synthesizing")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--slots", type=int, default=10)
    ap.add_argument("--out", default="plots")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    run_dir = out / "tracks-data"
    cmd = [args.bin, "run", "--mode", "proposed", "--out", str(run_dir)]
    if args.scenario:
        cmd += ["--scenario", args.scenario]
    else:
        cmd += ["--synthesize", args.synthesize, "--seed", str(args.seed),
                "--slots", str(args.slots)]
    subprocess.run(cmd, check=True)

    result = next(p for p in run_dir.iterdir() if "-proposed-" in p.name)
    slots = pd.read_csv(result / "slots.csv")
    echo = json.loads((result / "config-echo.json").read_text())
    scen = echo["scenario"]

    fig, ax = plt.subplots(figsize=(6, 6))
    region = scen["region"]
    ax.set_xlim(region["x_min"], region["x_max"])
    ax.set_ylim(region["y_min"], region["y_max"])
    station = scen["energy"]["station"]
    ax.plot(station[0], station[1], "ks", markersize=10, label="charging station")

    for pair in scen["pairs"]:
        color = "tab:blue" if pair["kind"] == "direct" else "tab:green"
        for trace in (pair["src_trace"], pair["dst_trace"]):
            xs = [p[0] for p in trace]
            ys = [p[1] for p in trace]
            ax.plot(xs[0], ys[0], ".", color=color, alpha=0.5)
            if len(xs) > 1:
                ax.plot(xs, ys, "-", color=color, alpha=0.2, linewidth=0.7)
                ax.plot(xs[-1], ys[-1], "x", color=color, alpha=0.7, markersize=4)

    cmap = plt.get_cmap("tab10")
    for i, (uav_id, track) in enumerate(slots.groupby("uav_id")):
        track = track.sort_values("slot")
        ax.plot(track.x_m, track.y_m, "-o", color=cmap(i % 10), markersize=3,
                label=f"drone {uav_id}")
        ax.plot(track.x_m.iloc[-1], track.y_m.iloc[-1], "o", color=cmap(i % 10),
                markersize=8, markerfacecolor="none")

    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title("drone tracks over the episode (dots: users, x: final user position)")
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    target = out / "tracks.png"
    fig.savefig(target, dpi=150)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

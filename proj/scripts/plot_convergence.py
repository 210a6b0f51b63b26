#!/usr/bin/env python3
"""Plot solver convergence: objective per alternation round, two user loads.

Synthesizes one instance per load, pins every drone's amplifier cap, runs
with the solver trace enabled, and plots the recorded per-slot objective
against the alternation round (power step then bandwidth step).

    ./scripts/plot_convergence.py --bin build/uavd2d --loads 20,40 --cap-dbm 36
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


def traced_run(bin_path, users, cap_dbm, seed, slots, data_dir):
    synth_dir = data_dir / f"scenario-u{users}"
    subprocess.run(
        [bin_path, "synth", "--synthesize", f"{users // 2},{users // 2},5",
         "--seed", str(seed), "--slots", str(slots), "--out", str(synth_dir)],
        check=True)
    scenario_file = next(synth_dir.glob("scenario-*.json"))
    doc = json.loads(scenario_file.read_text())
    for uav in doc["uavs"]:
        uav["max_tx_power_w"] = 10.0 ** ((cap_dbm - 30.0) / 10.0)
    scenario_file.write_text(json.dumps(doc, indent=2) + "\n")

    run_dir = data_dir / f"run-u{users}"
    subprocess.run(
        [bin_path, "run", "--scenario", str(scenario_file), "--mode", "proposed",
         "--dump-solver-trace", "--out", str(run_dir)],
        check=True)
    result = next(p for p in run_dir.iterdir() if "-proposed-" in p.name)
    return pd.read_csv(result / "alternation_trace.csv")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bin", default="build/uavd2d")
    ap.add_argument("--loads", default="20,40", help="total user counts, comma separated")
    ap.add_argument("--cap-dbm", type=float, default=36.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--slots", type=int, default=3)
    ap.add_argument("--out", default="plots")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = out / "convergence-data"

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for users, style in zip(args.loads.split(","), ("-o", "--s", ":^")):
        trace = traced_run(args.bin, int(users), args.cap_dbm, args.seed, args.slots, data)
        for slot, rounds in trace.groupby("slot"):
            ax.plot(rounds["round"], rounds.objective_bit_per_j, style, alpha=0.25,
                    color="gray", markersize=2)
        mean = trace.groupby("round").objective_bit_per_j.mean()
        ax.plot(mean.index, mean.values, style, label=f"{users} users (mean over slots)")
    ax.set_xlabel("alternation round")
    ax.set_ylabel("objective (bit/J)")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    target = out / "convergence.png"
    fig.savefig(target, dpi=150)
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

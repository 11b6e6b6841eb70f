#!/usr/bin/env python3
"""Plots a campaign output directory written by `blimpsim campaign --trace`.

Reads <dir>/summary.csv and <dir>/traces/<scenario>_<arm>_<trial>.csv and
writes one PNG per scenario (y, yaw and along-track wind estimate vs x) plus
a bar chart of the final cumulative RMSE per cell.
"""
import argparse
import math
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

ARM_COLORS = {"mhe_mpc": "tab:blue", "pid": "tab:orange", "open_loop": "tab:gray"}
STEM = re.compile(r"^(?P<scenario>.+)_(?P<arm>mhe_mpc|pid|open_loop)_(?P<trial>\d+)$")


def load_traces(directory):
    traces = []
    for path in sorted((directory / "traces").glob("*.csv")):
        match = STEM.match(path.stem)
        if match:
            traces.append((match["scenario"], match["arm"], int(match["trial"]), pd.read_csv(path)))
    return traces


def plot_scenario(scenario, traces, out):
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    seen = set()
    for _, arm, _, df in traces:
        label = arm if arm not in seen else None
        seen.add(arm)
        color = ARM_COLORS.get(arm, "black")
        axes[0].plot(df["x"], df["y"], color=color, alpha=0.6, lw=0.8, label=label)
        axes[1].plot(df["x"], df["yaw"].map(math.degrees), color=color, alpha=0.6, lw=0.8)
        if arm == "mhe_mpc":
            axes[2].plot(df["x"], df["est_wind_x"], color="tab:blue", alpha=0.6, lw=0.8)
            axes[2].plot(df["x"], df["est_wind_y"], color="tab:green", alpha=0.6, lw=0.8)
    axes[0].set_ylabel("y [m]")
    axes[1].set_ylabel("yaw [deg]")
    axes[2].set_ylabel("wind estimate [m/s]\n(blue x, green y)")
    axes[2].set_xlabel("x [m]")
    axes[0].legend(loc="best")
    axes[0].set_title(scenario)
    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def plot_summary(summary, out):
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for ax, column, unit in ((axes[0], "crmse_y", "m"), (axes[1], "crmse_yaw", "rad")):
        table = summary.pivot(index="scenario", columns="arm", values=f"mean_{column}")
        errors = summary.pivot(index="scenario", columns="arm", values=f"std_{column}")
        table.plot.bar(ax=ax, yerr=errors, capsize=2,
                       color=[ARM_COLORS.get(a, "black") for a in table.columns])
        ax.set_ylabel(f"final cRMSE [{unit}]")
        ax.set_title(column)
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("campaign_dir", type=Path)
    parser.add_argument("--out", type=Path, help="figure directory (default: <dir>/figures)")
    args = parser.parse_args()
    out = args.out or args.campaign_dir / "figures"
    out.mkdir(parents=True, exist_ok=True)

    plot_summary(pd.read_csv(args.campaign_dir / "summary.csv"), out / "summary.png")
    traces = load_traces(args.campaign_dir)
    for scenario in sorted({t[0] for t in traces}):
        plot_scenario(scenario, [t for t in traces if t[0] == scenario], out / f"{scenario}.png")
    print(f"wrote figures to {out}")


if __name__ == "__main__":
    main()

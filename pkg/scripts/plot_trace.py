#!/usr/bin/env python3
"""Plot a trace.csv produced by `ucbf run` as a four-panel summary figure.

Usage: python3 scripts/plot_trace.py out/trace.csv [-o figure.png]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ucbf.sim import read_trace_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("trace", help="path to a trace.csv written by `ucbf run`")
    ap.add_argument("-o", "--out", help="output image (default: <trace>.png)")
    args = ap.parse_args()

    trace = read_trace_csv(args.trace)
    t = trace.column("t")
    out = args.out or str(Path(args.trace).with_suffix(".png"))

    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)

    ax = axes[0, 0]
    ax.plot(t, trace.column("h_value"), label="h")
    ax.plot(t, trace.column("threshold"), "--", label="threshold")
    if trace.has_column("s_value"):
        ax.plot(t, trace.column("s_value"), label="s")
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_ylabel("barrier")
    ax.legend()

    ax = axes[0, 1]
    ax.plot(t, trace.column("rho"), label="rho")
    ax.plot(t, trace.column("effective_gain"), label="effective gain")
    if trace.has_column("varrho"):
        ax.plot(t, trace.column("varrho"), label="varrho")
    ax.set_ylabel("adaptation scaling")
    ax.legend()

    ax = axes[1, 0]
    for i, series in enumerate(trace.block("x").T):
        ax.plot(t, series, label=f"x{i}")
    for i, series in enumerate(trace.block("theta_hat").T):
        ax.plot(t, series, "--", label=f"theta_hat{i}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("state / estimate")
    ax.legend()

    ax = axes[1, 1]
    for i, series in enumerate(trace.block("u").T):
        ax.plot(t, series, label=f"u{i}")
    ax.plot(t, trace.column("delta"), ":", label="slack")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("input")
    ax.legend()

    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main()

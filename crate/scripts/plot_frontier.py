#!/usr/bin/env python3
"""Plot envelopes from `linsketch-bench frontier` output, or ratio hulls from `ratio`."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def plot_frontier(df, out):
    groups = list(df.groupby(["dataset", "order"]))
    fig, axes = plt.subplots(1, len(groups), figsize=(5 * len(groups), 4), squeeze=False)
    for ax, ((dataset, order), g) in zip(axes[0], groups):
        for (alg, env), s in g.groupby(["algorithm", "envelope"]):
            style = "-" if env == "lower" else ":"
            ax.step(s["space"], s["error"], style, where="post", label=f"{alg} {env}")
        ax.set(xscale="log", yscale="log", xlabel="space (words)", ylabel="error", title=f"{dataset} / {order}")
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out)


def plot_ratio(df, out):
    groups = list(df.groupby(["dataset", "order", "numerator", "denominator"]))
    fig, axes = plt.subplots(1, len(groups), figsize=(5 * len(groups), 4), squeeze=False)
    for ax, ((dataset, order, num, den), g) in zip(axes[0], groups):
        ax.fill_between(g["space"], g["ratio_low"], g["ratio_high"], alpha=0.4)
        ax.axhline(1.0, color="k", lw=0.5)
        ax.set(xscale="log", yscale="log", xlabel="space (words)", ylabel=f"{num} / {den}", title=f"{dataset} / {order}")
    fig.tight_layout()
    fig.savefig(out)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("input")
    p.add_argument("-o", "--output", default="frontier.png")
    args = p.parse_args()
    df = pd.read_csv(args.input)
    if "envelope" in df.columns:
        plot_frontier(df, args.output)
    else:
        plot_ratio(df, args.output)


if __name__ == "__main__":
    main()

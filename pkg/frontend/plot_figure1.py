#!/usr/bin/env python3
"""Render 3D scatter plots of joint MPL estimates with the shared-maximizer line.

Reads one or more experiment CSVs (columns n, p, beta_true, beta_hat,
B1_hat, B2_hat, status, ...) produced by `potts-infer experiment` with
kind=figure1 and q=3, and draws one 3D panel per distinct n: estimates
(beta_hat, B1_hat, B2_hat) scattered by p-value, with the line of fields
that keep a target simplex point m optimal overlaid across a beta range.

The line formula B_r(beta) = log(m_r / m_3) + beta * (m_3 - m_r) is
computed here directly so the script runs standalone on archived CSVs;
a test checks it against the `potts-infer meanfield --line` output.

Usage:
    plot_figure1.py --csv runs/n100.csv --csv runs/n200.csv \
        --m 0.2,0.5,0.3 --beta 0:2 --out fig.png

Rendering is deterministic: fixed view angles, no jitter. Rows whose fit
did not converge are drawn with an 'x' marker instead of a dot.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

REQUIRED_COLUMNS = {"n", "p", "beta_hat", "B1_hat", "B2_hat", "status"}
ELEV, AZIM = 18.0, -60.0
# Color convention: green for the sparsest p, red for the densest,
# intermediate p-values cycle through the remaining palette.
PALETTE = ["tab:orange", "tab:purple", "tab:brown", "tab:cyan"]


def line_point(m, beta):
    """Field (B_1, B_2) for which m stays the mean-field maximizer at beta."""
    m1, m2, m3 = m
    return (math.log(m1 / m3) + beta * (m3 - m1),
            math.log(m2 / m3) + beta * (m3 - m2))


def parse_m(text):
    parts = [float(t) for t in text.split(",")]
    if len(parts) != 3:
        sys.exit("error: --m must be three comma separated numbers (q=3)")
    if any(v <= 0 for v in parts) or abs(sum(parts) - 1.0) > 1e-9:
        sys.exit("error: --m must be a strictly positive probability vector")
    return tuple(parts)


def parse_beta_range(text):
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        sys.exit("error: --beta must look like lo:hi, e.g. 0:2")
    if not hi > lo:
        sys.exit("error: --beta range must have hi > lo")
    return lo, hi


def read_rows(paths):
    """Load all CSVs; returns rows grouped by n. Empty files are an error."""
    by_n = defaultdict(list)
    for path in paths:
        try:
            with open(path, newline="") as f:
                reader = csv.DictReader(f)
                if reader.fieldnames is None:
                    sys.exit(f"error: empty CSV file: {path}")
                missing = REQUIRED_COLUMNS - set(reader.fieldnames)
                if missing:
                    sys.exit(f"error: {path} lacks columns "
                             f"{sorted(missing)} (need a q=3 figure1 CSV)")
                count = 0
                for rec in reader:
                    by_n[int(rec["n"])].append(rec)
                    count += 1
                if count == 0:
                    sys.exit(f"error: empty CSV file: {path}")
        except FileNotFoundError:
            sys.exit(f"error: no such file: {path}")
    return by_n


def p_color(p_sorted, p):
    if p == p_sorted[0]:
        return "tab:green"
    if p == p_sorted[-1] and len(p_sorted) > 1:
        return "tab:red"
    return PALETTE[p_sorted.index(p) % len(PALETTE)]


def render(by_n, m, beta_range, out_path):
    n_panels = len(by_n)
    fig = plt.figure(figsize=(6 * n_panels, 6))
    lo, hi = beta_range
    n_line = 201
    betas = [lo + (hi - lo) * k / (n_line - 1) for k in range(n_line)]
    line_b1, line_b2 = zip(*(line_point(m, b) for b in betas))

    for panel, n in enumerate(sorted(by_n), start=1):
        ax = fig.add_subplot(1, n_panels, panel, projection="3d")
        rows = by_n[n]
        p_sorted = sorted({float(r["p"]) for r in rows})
        for p in p_sorted:
            color = p_color(p_sorted, p)
            for converged, marker, tag in ((True, "o", ""),
                                           (False, "x", " (non-converged)")):
                sel = [r for r in rows if float(r["p"]) == p
                       and (r["status"] == "converged") == converged]
                if not sel:
                    continue
                ax.scatter([float(r["beta_hat"]) for r in sel],
                           [float(r["B1_hat"]) for r in sel],
                           [float(r["B2_hat"]) for r in sel],
                           c=color, marker=marker, s=14, depthshade=False,
                           label=f"p={p:g}{tag}")
        ax.plot(betas, line_b1, line_b2, c="tab:blue", lw=2,
                label="line of inestimability")
        ax.set_title(f"N = {n}")
        ax.set_xlabel(r"$\hat\beta$")
        ax.set_ylabel(r"$\hat B_1$")
        ax.set_zlabel(r"$\hat B_2$")
        ax.view_init(elev=ELEV, azim=AZIM)
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="3D scatter of joint MPL estimates with the "
                    "shared-maximizer line overlaid (q=3)")
    parser.add_argument("--csv", action="append", required=True,
                        help="figure1 experiment CSV (repeatable)")
    parser.add_argument("--m", required=True,
                        help="target simplex point m1,m2,m3")
    parser.add_argument("--beta", default="0:2",
                        help="beta range for the line, lo:hi")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)

    m = parse_m(args.m)
    beta_range = parse_beta_range(args.beta)
    by_n = read_rows(args.csv)
    render(by_n, m, beta_range, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

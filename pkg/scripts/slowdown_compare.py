#!/usr/bin/env python3
"""Relaxation slow-down from a steady state dressed with its slowest doublet:
finite-size curves against the two-mode thermodynamic-limit law, over a range
of sizes so the deviation power law is fitted too."""

import argparse

from spinbath.cli import main as cli

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/slowdown")
    args = ap.parse_args()
    cli([
        "evolve",
        "--two-j", "40 80 160 320",
        "--p", "0.5",
        "--initial", "hp-doublet:a=0:b=1/6",
        "--times", "lin:0:3:61",
        "--out", args.out,
    ])

#!/usr/bin/env python3
"""Meeting-time sweep over (eps, L) for all three couplings on a Gaussian.

Desk-scale analog of the high-dimensional robustness study; bump --dim and
--runs for the full version.
"""

import argparse
import sys

from coupledhmc.cli import main


def cli():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="meeting_sweep.csv")
    args = parser.parse_args()
    return main([
        "meet",
        "--target", "gaussian",
        "--dim", str(args.dim),
        "--eps", "0.1,0.2,0.3,0.4",
        "--steps", "10",
        "--coupling", "crn,maximal,w2",
        "--runs", str(args.runs),
        "--max-iters", "1000",
        "--seed", str(args.seed),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(cli())

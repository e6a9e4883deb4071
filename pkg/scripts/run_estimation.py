#!/usr/bin/env python3
"""Unbiased estimation with the inefficiency diagnostics on a chosen target.

Runs the preliminary meeting-time stage, picks (k, m), then produces the
across-run estimate table plus relative inefficiency against a long
single-chain reference.
"""

import argparse
import sys

from coupledhmc.cli import main


def cli():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--target", default="gaussian",
                        choices=["gaussian", "gmm", "banana", "logistic", "lgcp"])
    parser.add_argument("--dim", type=int, default=5)
    parser.add_argument("--eps", type=float, default=0.3)
    parser.add_argument("--steps", type=int, default=10)
    parser.add_argument("--coupling", default="w2", choices=["crn", "maximal", "w2"])
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--reference-samples", type=int, default=5000)
    parser.add_argument("--out", default="estimates.json")
    args = parser.parse_args()
    return main([
        "estimate",
        "--target", args.target,
        "--dim", str(args.dim),
        "--eps", str(args.eps),
        "--steps", str(args.steps),
        "--coupling", args.coupling,
        "--runs", str(args.runs),
        "--max-iters", "2000",
        "--seed", str(args.seed),
        "--reference-samples", str(args.reference_samples),
        "--out", args.out,
        "--format", "json",
    ])


if __name__ == "__main__":
    sys.exit(cli())

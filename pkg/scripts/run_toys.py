#!/usr/bin/env python3
"""Both toy studies plus the two-trajectory coupling illustration.

Produces gmm_efficiency.csv, banana_table.csv and illustration.json in the
chosen output directory. Full-scale settings take ~10 minutes; pass --quick
for a fast smoke run.
"""

import argparse
import os
import sys

from coupledhmc.cli import main


def cli():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default=".")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quick", action="store_true",
                        help="small run counts for a fast smoke check")
    args = parser.parse_args()
    runs_gmm, cap_gmm = (20, 30) if args.quick else (500, 100)
    runs_ban, cap_ban = (20, 100) if args.quick else (500, 500)
    rc = main([
        "toys", "gmm",
        "--runs", str(runs_gmm), "--max-iters", str(cap_gmm),
        "--seed", str(args.seed),
        "--out", os.path.join(args.outdir, "gmm_efficiency.csv"),
    ])
    rc |= main([
        "toys", "banana",
        "--runs", str(runs_ban), "--max-iters", str(cap_ban),
        "--seed", str(args.seed),
        "--out", os.path.join(args.outdir, "banana_table.csv"),
    ])
    rc |= main([
        "illustrate",
        "--seed", str(args.seed),
        "--out", os.path.join(args.outdir, "illustration.json"),
    ])
    return rc


if __name__ == "__main__":
    sys.exit(cli())

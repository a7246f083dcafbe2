#!/usr/bin/env python3
"""Measure all four comparison tables on whatever datasets sit in ./data.

Thin driver over `deepmlc reproduce`: one CSV per table into --out-dir.
The default grid is the reduced one (u in {60,120}, eta 0.1, alpha 0.8);
pass --grid default for the full published grid if you have the hours.
"""

import argparse
import os
import sys

from deepmlc.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data-dir", default="data")
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--seed", default="0")
    ap.add_argument("--jobs", default=str(min(8, os.cpu_count() or 1)))
    ap.add_argument("--grid", default="reduced")
    ap.add_argument("--tables", default="2a,3,4,5")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    rc = 0
    for table in args.tables.split(","):
        out = os.path.join(args.out_dir, f"table_{table}.csv")
        print(f"== table {table} -> {out}")
        rc |= cli_main(["reproduce", "--table", table, "--data-dir", args.data_dir,
                        "--seed", args.seed, "--jobs", args.jobs,
                        "--grid", args.grid, "--out", out])
    return rc


if __name__ == "__main__":
    sys.exit(main())

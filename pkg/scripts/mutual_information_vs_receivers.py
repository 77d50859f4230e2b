#!/usr/bin/env python3
"""Mutual information per slot against SNR for several receiver counts."""

import argparse
import csv
import sys

from vlcmimo.channel import preset
from vlcmimo.codebook import CodebookSpec
from vlcmimo.sim import SweepPlan, run_mi_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nt", type=int, default=4)
    ap.add_argument("--receivers", default=None, help="comma list, default 1,2,n_t")
    ap.add_argument("--snr-max", type=float, default=60.0)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--channels", type=int, default=1000)
    ap.add_argument("--estimator", choices=["paired", "closed-form"], default="paired")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()

    receivers = [int(v) for v in (args.receivers or f"1,2,{args.nt}").split(",")]
    grid = [5.0 * i for i in range(int(args.snr_max // 5) + 1)]
    writer = csv.writer(args.out, lineterminator="\n")
    writer.writerow(("n_t", "n_r", "snr_db", "mi", "mi_se"))
    for n_r in receivers:
        plan = SweepPlan(CodebookSpec(args.nt), preset(n_t=args.nt, n_r=n_r), grid, seed=args.seed,
                         mi_samples=args.samples, bound_samples=args.channels, mi_estimator=args.estimator)
        for row in run_mi_sweep(plan).rows:
            writer.writerow((args.nt, n_r, row["snr_db"], row["mi"], row["mi_se"]))


if __name__ == "__main__":
    main()

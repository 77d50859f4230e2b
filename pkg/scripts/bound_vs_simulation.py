#!/usr/bin/env python3
"""Union bound against simulated ML codeword error rate for n_t = 4.

Sweeps n_r in {1, 2, 4} and gamma in {1/4, 3/4}; writes one CSV with the
configuration in the first columns.
"""

import argparse
import csv
import sys

from vlcmimo.channel import preset
from vlcmimo.codebook import CodebookSpec
from vlcmimo.sim import COLUMNS, SweepPlan, merge_results, run_bound_sweep, run_cer_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--receivers", default="1,2,4")
    ap.add_argument("--gammas", default="1/4,3/4")
    ap.add_argument("--snr", default="0:40:5", help="start:stop:step in dB")
    ap.add_argument("--min-errors", type=int, default=1000)
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--bound-samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()

    start, stop, step = (float(v) for v in args.snr.split(":"))
    grid = [start + i * step for i in range(int(round((stop - start) / step)) + 1)]
    writer = csv.writer(args.out, lineterminator="\n")
    writer.writerow(("n_r", "gamma", *COLUMNS))
    for n_r in (int(v) for v in args.receivers.split(",")):
        for gamma in args.gammas.split(","):
            plan = SweepPlan(CodebookSpec.from_gamma(4, gamma), preset(n_t=4, n_r=n_r), grid,
                             trials_per_point=args.trials, min_errors=args.min_errors,
                             seed=args.seed, bound_samples=args.bound_samples)
            res = merge_results(run_cer_sweep(plan), run_bound_sweep(plan))
            for row in res.rows:
                writer.writerow((n_r, gamma, *("" if row[c] is None else row[c] for c in COLUMNS)))
            args.out.flush()


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""ML codeword error rate and union bound for several LED semi-angles.

Gains stay in units of the default 60-degree on-axis gain, so narrower beams
show up as a real change of received power, not a rescaled SNR axis.
"""

import argparse
import csv
import sys

from vlcmimo.channel import preset
from vlcmimo.codebook import CodebookSpec
from vlcmimo.sim import COLUMNS, SweepPlan, merge_results, run_bound_sweep, run_cer_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nt", type=int, default=4)
    ap.add_argument("--nr", type=int, default=4)
    ap.add_argument("--angles", default="15,30,45,60", help="semi-angles in degrees")
    ap.add_argument("--snr-max", type=float, default=40.0)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--min-errors", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()

    grid = [5.0 * i for i in range(int(args.snr_max // 5) + 1)]
    writer = csv.writer(args.out, lineterminator="\n")
    writer.writerow(("semi_angle_deg", *COLUMNS))
    for angle in (float(v) for v in args.angles.split(",")):
        model = preset(n_t=args.nt, n_r=args.nr, semi_angle_deg=angle)
        plan = SweepPlan(CodebookSpec(args.nt), model, grid, trials_per_point=args.trials,
                         min_errors=args.min_errors, seed=args.seed)
        res = merge_results(run_cer_sweep(plan), run_bound_sweep(plan))
        for row in res.rows:
            writer.writerow((angle, *("" if row[c] is None else row[c] for c in COLUMNS)))


if __name__ == "__main__":
    main()

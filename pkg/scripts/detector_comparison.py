#!/usr/bin/env python3
"""Codeword error rate of ML, MMSE and ZF detection on square n_t x n_t links."""

import argparse
import sys

from vlcmimo.channel import preset
from vlcmimo.codebook import CodebookSpec
from vlcmimo.detection import Detector
from vlcmimo.sim import SweepPlan, run_cer_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nt", type=int, default=4)
    ap.add_argument("--gamma", default=None, help="default 1/n_t")
    ap.add_argument("--snr-max", type=float, default=40.0)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--min-errors", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fov-cutoff", choices=["on", "off"], default="on")
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()

    spec = CodebookSpec.from_gamma(args.nt, args.gamma or f"1/{args.nt}")
    model = preset(n_t=args.nt, n_r=args.nt, fov_cutoff=args.fov_cutoff == "on")
    grid = [5.0 * i for i in range(int(args.snr_max // 5) + 1)]
    plan = SweepPlan(spec, model, grid, detectors=tuple(Detector), trials_per_point=args.trials,
                     min_errors=args.min_errors, seed=args.seed)
    args.out.write(run_cer_sweep(plan).to_csv())


if __name__ == "__main__":
    main()

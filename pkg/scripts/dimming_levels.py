#!/usr/bin/env python3
"""Closed-form code properties for every dimming level of a range of antenna counts."""

import argparse
import csv
import sys

from vlcmimo.codebook import CodebookSpec, Method, code_rate, max_run_length, min_hamming_distance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nt-min", type=int, default=2)
    ap.add_argument("--nt-max", type=int, default=8)
    ap.add_argument("--out", type=argparse.FileType("w"), default=sys.stdout)
    args = ap.parse_args()

    writer = csv.writer(args.out, lineterminator="\n")
    writer.writerow(("n_t", "gamma", "method", "k", "rate", "run_length", "dmin", "codeword_weight"))
    for n in range(args.nt_min, args.nt_max + 1):
        specs = [CodebookSpec(n, m) for m in range(1, n)] + [CodebookSpec(n, n - 1, Method.COMPLEMENT)]
        for spec in specs:
            dmin = min_hamming_distance(spec) if spec.k <= 16 else ""
            writer.writerow((n, f"{spec.weight}/{n}", spec.method.value, spec.k, float(code_rate(n)),
                             max_run_length(spec), dmin, spec.weight * n))


if __name__ == "__main__":
    main()

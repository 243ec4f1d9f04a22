"""Noise-sensitivity curves TV(pi^rho_n, mu_n x mu_n) with the Gaussian-limit column.

The triangle-group curve is the expensive one (a few minutes, about 1.3 GB);
skip it with --quick.
"""

import argparse
import sys

from vawalk.experiments import RunOptions, curves_to_csv, noise_curve
from vawalk.fixtures import load_measure


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="noise.csv")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--quick", action="store_true", help="skip the triangle-group curve")
    args = ap.parse_args(argv)
    opts = RunOptions(threads=args.threads)
    cases = [
        ("Dinf:lsrw", [0.2, 0.5], [100, 400, 1600]),
        ("Z:lazy", [0.05, 0.1, 0.5], [250, 500, 1000, 2000]),
    ]
    if not args.quick:
        cases.append(("Tri:uniform6", [0.3], [16, 32, 64]))
    rows = []
    for ref, rhos, times in cases:
        for p in noise_curve(load_measure(ref), rhos, times, opts):
            rows.append((ref, p))
            print(f"{ref:14s} rho={p.rho:<5g} n={p.n:5d}  tv={p.tv:.6f}  limit={p.prediction:.6f}",
                  file=sys.stderr)
    with open(args.out, "w") as fh:
        fh.write(curves_to_csv(rows))


if __name__ == "__main__":
    main()

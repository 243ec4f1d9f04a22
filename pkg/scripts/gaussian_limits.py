"""Gaussian-limit TV of the noised lazy walk on Z as a function of rho.

For Z the coupled covariance is (2/3) [[1, 1 - rho], [1 - rho, 1]], so the
limit is the TV between that Gaussian and the independent one.
"""

import argparse
import csv

import numpy as np

from vawalk.experiments import gaussian_limit_tv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="gaussian_limits.csv")
    ap.add_argument("--points", type=int, default=41)
    args = ap.parse_args(argv)
    ident = np.eye(2) * 2 / 3
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rho", "limit_tv"])
        for rho in np.linspace(0.025, 1.0, args.points):
            a = (2 / 3) * np.array([[1, 1 - rho], [1 - rho, 1]])
            w.writerow([f"{rho:.6g}", f"{gaussian_limit_tv(a, ident):.12g}"])


if __name__ == "__main__":
    main()

"""Local CLT convergence on the built-in walks; writes a CSV of TV against time."""

import argparse
import sys

from vawalk.experiments import curves_to_csv, lclt_curve
from vawalk.fixtures import load_measure

CASES = {
    "Dinf:lsrw": [100, 200, 400, 1000],
    "Dinf:srw": [100, 200, 400, 1000],
    "Dinf:ape": [100, 200, 400, 1000],
    "Z:lazy": [100, 300, 900],
    "Tri:uniform6": [50, 100, 250, 500],
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="lclt.csv")
    args = ap.parse_args(argv)
    rows = []
    for ref, times in CASES.items():
        for p in lclt_curve(load_measure(ref), times):
            rows.append((ref, p))
            print(f"{ref:14s} n={p.n:5d}  tv={p.tv:.6f}  +/- {p.tv_error:.1e}", file=sys.stderr)
    with open(args.out, "w") as fh:
        fh.write(curves_to_csv(rows))


if __name__ == "__main__":
    main()

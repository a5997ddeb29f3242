"""Tabulate the lambda bound and lambda_0 across q in (2, 3) for the default h'.

Columns: q, kappa, the two terms of the bound, their minimum, and lambda_0 (blank when
the default h' does not cross the bound on [1, 100]).
"""
import argparse
import csv
import sys

import numpy as np

from cavcal import bounds
from cavcal.errors import NoBracket


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--kappa-mode", choices=["min", "max"], default="min")
    p.add_argument("--nu1", type=float, default=bounds.NU1)
    args = p.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["q", "kappa", "term_est1", "term_cstar", "rhs", "lambda_zero"])
    for q in np.linspace(2.0, 3.0, args.points + 2)[1:-1]:
        kappa = bounds.kappa_for_mode(float(q), args.kappa_mode)
        rep = bounds.lambda_bound(float(q), kappa, 1.0, args.nu1)
        try:
            lz = f"{bounds.lambda_zero(float(q), kappa, args.nu1):.8g}"
        except NoBracket:
            lz = ""
        w.writerow([f"{q:.4f}", f"{kappa:.8g}", f"{rep.term_est1:.8g}", f"{rep.term_cstar:.8g}", f"{rep.rhs:.8g}", lz])


if __name__ == "__main__":
    main()

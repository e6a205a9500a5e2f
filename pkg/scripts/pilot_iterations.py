"""Fixed-point iterations and resulting pilot counts against the collision target."""

import argparse
import csv
import sys

import numpy as np

from wpcn_outage.numerics import DiscreteExp
from wpcn_outage.pilots import optimal_pilot_count


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--S", type=int, nargs="+", default=[10, 100, 500])
    ap.add_argument("--tol", type=float, nargs="+", default=[1e-2, 1e-5])
    ap.add_argument("--lambda", dest="rate", type=float, default=0.25)
    ap.add_argument("--t", type=float, default=0.02)
    ap.add_argument("--T_c", type=float, default=0.4)
    args = ap.parse_args()

    tr = DiscreteExp(args.rate)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["S [-]", "tol [-]", "eps [-]", "iterations [-]", "raw_count [-]",
                "pilots [-]", "collision [-]"])
    for S in args.S:
        for tol in args.tol:
            for eps in np.logspace(-3, np.log10(0.5), 12):
                plan = optimal_pilot_count(S, float(eps), tr, args.t, args.T_c, tol)
                w.writerow([S, tol, f"{eps:.4g}", plan.iterations_used, plan.raw_count,
                            plan.num_sequences, f"{plan.collision:.4e}"])


if __name__ == "__main__":
    main()

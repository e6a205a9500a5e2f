"""Mean incident power at a device the MRT beam is not aimed at.

Monte Carlo of |h_t^H h_i|^2 / ||h_t||^2 with independent Rician channels
against the fitted closed form, over kappa and M_t.
"""

import argparse
import csv
import sys

import numpy as np

from wpcn_outage.numerics import trial_rng
from wpcn_outage.scenario import sample_rician
from wpcn_outage.wet import mrt_crossgain


def crossgain_mc(kappa, m_t, draws, rng, chunk=100_000):
    total = 0.0
    for start in range(0, draws, chunk):
        b = min(chunk, draws - start)
        ht = sample_rician(m_t, kappa, rng, b)
        hi = sample_rician(m_t, kappa, rng, b)
        num = np.abs(np.sum(ht.conj() * hi, axis=1)) ** 2
        total += np.sum(num / np.sum(np.abs(ht) ** 2, axis=1))
    return total / draws


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kappa", type=float, nargs="+", default=[0, 0.5, 1, 2, 5, 10, 20])
    ap.add_argument("--m_t", type=int, nargs="+", default=[2, 8, 32, 128])
    ap.add_argument("--draws", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kappa [-]", "M_t [-]", "monte_carlo [-]", "fit [-]", "rel_error [-]"])
    for i, k in enumerate(args.kappa):
        for m in args.m_t:
            mc = crossgain_mc(k, m, args.draws, trial_rng(args.seed, i, m))
            fit = mrt_crossgain(k, m)
            w.writerow([k, m, f"{mc:.6g}", f"{fit:.6g}", f"{fit / mc - 1:+.4f}"])


if __name__ == "__main__":
    main()

"""Information outage under random access for ZF and MMSE, against M_r.

The total antenna count M is fixed; M_t = M - M_r antennas power the devices.
"""

import argparse
import csv
import sys

from wpcn_outage.numerics import DiscreteExp, trial_rng
from wpcn_outage.pilots import optimal_pilot_count
from wpcn_outage.scenario import SystemParams, ring_deployment
from wpcn_outage.wit import info_outage_poisson


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=6)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.1])
    ap.add_argument("--t_s", type=float, default=1.6)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    dep = ring_deployment(100)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["M_r [-]", "eps [-]", "equalizer", "pilots [-]", "info_outage [-]", "ci_half_width [-]"])
    for eps in args.eps:
        for m_r in range(1, args.M):
            p = SystemParams(antennas_total=args.M, antennas_tx=args.M - m_r)
            tr = DiscreteExp(p.coherence_time / args.t_s)
            plan = optimal_pilot_count(dep.size, eps, tr, p.slot_time, p.coherence_time)
            for eq in ("ZF", "MMSE"):
                # same substream for both equalizers: common random numbers
                r = info_outage_poisson(p, dep, tr, plan, eq, args.trials,
                                        trial_rng(args.seed, m_r, int(eps * 1e6)))
                w.writerow([m_r, eps, eq, plan.num_sequences, f"{r.value:.6e}",
                            f"{r.ci_half_width:.2e}"])


if __name__ == "__main__":
    main()

"""Overall outage of the weakest device against the reporting period t_s."""

import argparse
import sys

import numpy as np

from wpcn_outage.bench import ScenarioConfig, run_sweep, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scheme", default="CSI_MRT", choices=["CSI_MRT", "SA"])
    ap.add_argument("--equalizer", default="MMSE", choices=["ZF", "MMSE"])
    ap.add_argument("--traffic", choices=["periodic", "poisson"], default="periodic")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    grid = tuple(float(x) for x in np.round(np.arange(0.4, 4.01, 0.4), 6))
    cfg = ScenarioConfig(traffic=args.traffic, wet_scheme=args.scheme, equalizer=args.equalizer,
                         sweep_param="t_s", sweep_values=grid, trials=args.trials,
                         seed=args.seed, workers=args.workers)
    write_table(run_sweep(cfg), cfg, sys.stdout)


if __name__ == "__main__":
    main()

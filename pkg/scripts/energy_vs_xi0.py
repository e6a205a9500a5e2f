"""Energy outage of the weakest device against the per-antenna CSI cost.

CSI-free switching antennas against MRT with acquired CSI, for periodic or
Poisson reporting. Writes one CSV per scheme.
"""

import argparse
import os

import numpy as np

from wpcn_outage.bench import ScenarioConfig, run_sweep, write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--traffic", choices=["periodic", "poisson"], default="periodic")
    ap.add_argument("--dbm", type=float, nargs=3, default=[-40, -5, 2.5],
                    metavar=("START", "STOP", "STEP"), help="xi0 grid in dBm (x 1 s)")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    start, stop, step = args.dbm
    dbm = np.arange(start, stop + step / 2, step)
    grid = tuple(float(10 ** (d / 10) * 1e-3) for d in dbm)
    os.makedirs(args.outdir, exist_ok=True)
    for scheme in ("SA", "CSI_MRT"):
        cfg = ScenarioConfig(traffic=args.traffic, wet_scheme=scheme, sweep_param="xi0",
                             sweep_values=grid, trials=args.trials, seed=args.seed)
        path = os.path.join(args.outdir, f"energy_vs_xi0_{args.traffic}_{scheme}.csv")
        with open(path, "w") as fh:
            write_table(run_sweep(cfg), cfg, fh)
        print(path)


if __name__ == "__main__":
    main()

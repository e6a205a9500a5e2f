"""Command-line entry point: sweeps, pilot plans and one-shot beamformer solves."""

from __future__ import annotations

import argparse
import ast
import sys

import numpy as np

from .bench import ScenarioConfig, run_sweep, write_table
from .beamforming import ConvergenceError, incident_power, mrt_precoder, solve_fair_beamforming
from .numerics import DiscreteExp, trial_rng
from .pilots import FixedPointError, optimal_pilot_count
from .scenario import sample_rician


def _override(text):
    key, sep, raw = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        value = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        value = raw
    return key.strip(), value


def _load(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    changes = dict(args.set or [])
    if args.seed is not None:
        changes["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    return cfg.with_overrides(changes) if changes else cfg


def cmd_sweep(args):
    cfg = _load(args)
    rows = run_sweep(cfg)
    if args.output == "-":
        write_table(rows, cfg, sys.stdout)
    else:
        with open(args.output, "w") as fh:
            write_table(rows, cfg, fh)
        print(f"wrote {len(rows)} rows to {args.output}")


def cmd_pilot_plan(args):
    plan = optimal_pilot_count(args.S, args.eps, DiscreteExp(args.rate), args.t, args.T_c, args.tol)
    print(f"L* = {plan.num_sequences}")
    print(f"iterations = {plan.iterations_used}")
    print(f"collision = {plan.collision:.6g}")
    print(f"reuse = {plan.reuse_factor:.4f}")


def cmd_solve_eb(args):
    cfg = _load(args)
    p = cfg.params
    dep = cfg.deployment()
    rng = trial_rng(cfg.seed)
    H = sample_rician(p.antennas_tx, p.rician_k, rng, dep.size)
    gains = dep.as_array()
    pre = solve_fair_beamforming(H, gains, p.hap_power, tol=args.tol)
    mrt = float(incident_power(mrt_precoder(H[dep.worst_index]), H, gains, p.hap_power).min())
    print(f"zeta = {pre.objective:.6e} W")
    print(f"upper_bound = {pre.upper_bound:.6e} W")
    print(f"beams = {pre.rank}")
    print(f"iterations = {pre.iterations}")
    print(f"mrt_value = {mrt:.6e} W")
    print(f"gain_over_mrt = {pre.objective / mrt:.4f}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wpcn-outage", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_args(p):
        p.add_argument("--config", help="scenario file; defaults are used when omitted")
        p.add_argument("--seed", type=int)
        p.add_argument("--set", action="append", type=_override, metavar="KEY=VALUE",
                       help="override a config key (repeatable)")

    sw = sub.add_parser("sweep", help="run a parameter sweep and write a CSV table")
    sw.add_argument("config", nargs="?", help="scenario file")
    sw.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--trials", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--set", action="append", type=_override, metavar="KEY=VALUE")
    sw.set_defaults(func=cmd_sweep)

    pp = sub.add_parser("pilot-plan", help="fewest pilots meeting a collision target")
    pp.add_argument("--S", type=int, default=100)
    pp.add_argument("--eps", type=float, default=0.1)
    pp.add_argument("--lambda", dest="rate", type=float, default=0.25)
    pp.add_argument("--t", type=float, default=0.02)
    pp.add_argument("--T_c", type=float, default=0.4)
    pp.add_argument("--tol", type=float, default=1e-5)
    pp.set_defaults(func=cmd_pilot_plan)

    eb = sub.add_parser("solve-eb", help="max-min energy beamformer for one channel draw")
    scenario_args(eb)
    eb.add_argument("--tol", type=float, default=1e-4)
    eb.set_defaults(func=cmd_solve_eb)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, FixedPointError, ConvergenceError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

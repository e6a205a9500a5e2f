"""Scenario configs, outage composition and the parameter-sweep engine.

A config file is a single ``[scenario]`` section of ``key = value`` lines,
values written as Python literals. Physical quantities are SI (W, J, s); the
per-antenna CSI and per-symbol pilot costs are energies (J). Any key missing
from the file keeps its default.
"""

from __future__ import annotations

import ast
import configparser
import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .numerics import DiscreteExp, trial_rng
from .pilots import optimal_pilot_count
from .scenario import Deployment, SystemParams, ring_deployment
from .wet import (Scheme, energy_outage_periodic, energy_outage_poisson,
                  simulate_energy_outage_sdp)
from .wit import (Equalizer, UplinkOptions, info_outage_periodic, info_outage_poisson,
                  pilot_cost_periodic)

SECTION = "scenario"

# short names accepted as sweep axes, mapped to config keys
ALIASES = {
    "xi0": "dl_pilot_unit_energy",
    "xi0_ul": "ul_pilot_unit_energy",
    "M": "antennas_total",
    "M_t": "antennas_tx",
    "S": "num_devices",
    "p_c": "circuit_power",
    "P": "hap_power",
    "kappa": "rician_k",
    "k": "spectral_msg",
    "lambda": "rate",
}

UNITS = {
    "hap_power": "W", "noise_power": "W", "tx_power": "W", "circuit_power": "W",
    "coherence_time": "s", "slot_time": "s", "pilot_symbol_time": "s", "t_s": "s",
    "dl_pilot_unit_energy": "J", "ul_pilot_unit_energy": "J", "spectral_msg": "bit/Hz",
}


def overall_outage(energy: float, info: float) -> float:
    """Outage when either the energy or the information phase fails."""
    for name, v in (("energy", energy), ("info", info)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} outage {v} outside [0, 1]")
    # same as 1 - (1-a)(1-b), without cancellation for tiny outages
    return energy + info - energy * info


@dataclass
class OutageBreakdown:
    energy: float
    info: float
    overall: float
    ci_half_width: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for v in (self.energy, self.info, self.overall):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"probability {v} outside [0, 1]")
        if abs(self.overall - (self.energy + self.info - self.energy * self.info)) > 1e-12:
            raise ValueError("overall outage inconsistent with its parts")


@dataclass
class ScenarioConfig:
    params: SystemParams = field(default_factory=SystemParams)
    num_devices: int = 100
    radii: tuple = (2.0, 4.0, 6.0, 8.0, 10.0, 12.0)
    pl_exponent: float = 2.7
    fixed_loss_db: float = 16.0
    traffic: str = "periodic"  # or "poisson"
    t_s: float = 1.6
    rate: float | None = None  # None: T_c / t_s
    eps: float = 0.1
    pilot_tol: float = 1e-5
    wet_scheme: str = "CSI_MRT"
    equalizer: str = "MMSE"
    auto_split: bool = False  # antennas_tx follows antennas_total // 2
    si_attenuation: float = 0.0
    near_field_gain: float = 1.0
    imperfect_csi: bool = False
    sweep_param: str = "t_s"
    sweep_values: tuple = (1.6,)
    trials: int = 100_000
    sdp_trials: int = 200
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        self.traffic = str(self.traffic).lower()
        if self.traffic not in ("periodic", "poisson"):
            raise ValueError(f"traffic must be 'periodic' or 'poisson', got {self.traffic!r}")
        self.wet_scheme = Scheme.parse(self.wet_scheme).value
        self.equalizer = Equalizer.parse(self.equalizer).value
        self.radii = tuple(float(r) for r in self.radii)
        self.sweep_values = tuple(self.sweep_values)
        if not self.sweep_values:
            raise ValueError("sweep grid is empty")
        if self.trials < 1 or self.sdp_trials < 1:
            raise ValueError("trial counts must be >= 1")
        if self.traffic == "poisson" and not 0 < self.eps < 1:
            raise ValueError("poisson traffic needs eps in (0, 1)")
        self.sweep_param = ALIASES.get(self.sweep_param, self.sweep_param)
        if self.sweep_param not in _config_keys():
            raise ValueError(f"unknown sweep parameter {self.sweep_param!r}")

    def at(self, value) -> "ScenarioConfig":
        """Copy with the swept key set to ``value``."""
        return self.with_overrides({self.sweep_param: value})

    def with_overrides(self, changes: dict) -> "ScenarioConfig":
        flat = self.to_flat()
        for key, val in changes.items():
            key = ALIASES.get(key, key)
            if key not in flat:
                raise ValueError(f"unknown config key {key!r}")
            flat[key] = val
        return ScenarioConfig.from_flat(flat)

    # -- flat key/value form --

    def to_flat(self) -> dict:
        out = {f.name: getattr(self.params, f.name) for f in fields(SystemParams)}
        for f in fields(self):
            if f.name != "params":
                out[f.name] = getattr(self, f.name)
        return out

    @classmethod
    def from_flat(cls, flat: dict) -> "ScenarioConfig":
        flat = {ALIASES.get(k, k): v for k, v in flat.items()}
        unknown = set(flat) - set(_config_keys())
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        pnames = {f.name for f in fields(SystemParams)}
        pvals = {k: v for k, v in flat.items() if k in pnames}
        rest = {k: v for k, v in flat.items() if k not in pnames}
        if rest.get("auto_split"):
            pvals["antennas_tx"] = int(pvals.get("antennas_total",
                                                 SystemParams.antennas_total)) // 2
        return cls(params=SystemParams(**pvals), **rest)

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp[SECTION] = {k: repr(v) for k, v in self.to_flat().items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "ScenarioConfig":
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp.read_string(text)
        if cp.sections() != [SECTION]:
            raise ValueError(f"config needs exactly one [{SECTION}] section")
        flat = {}
        for key, raw in cp[SECTION].items():
            try:
                flat[key] = ast.literal_eval(raw)
            except (ValueError, SyntaxError):
                raise ValueError(f"bad value for {key}: {raw!r}") from None
        return cls.from_flat(flat)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            return cls.from_text(fh.read())

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())

    def deployment(self) -> Deployment:
        return ring_deployment(self.num_devices, self.radii, self.pl_exponent, self.fixed_loss_db)

    def traffic_law(self) -> DiscreteExp:
        rate = self.rate if self.rate is not None else self.params.coherence_time / self.t_s
        return DiscreteExp(rate)


def _config_keys():
    return [f.name for f in fields(SystemParams)] + [
        f.name for f in fields(ScenarioConfig) if f.name != "params"]


def evaluate_point(cfg: ScenarioConfig, rng: np.random.Generator) -> OutageBreakdown:
    """Energy, information and overall outage of the weakest device."""
    p = cfg.params
    dep = cfg.deployment()
    scheme = Scheme.parse(cfg.wet_scheme)
    beta = dep.worst_gain
    meta = {"beta_worst": beta}

    if cfg.traffic == "periodic":
        csi_ul = pilot_cost_periodic(dep.size, cfg.t_s, p.slot_time, p.ul_pilot_unit_energy)
    else:
        traffic = cfg.traffic_law()
        plan = optimal_pilot_count(dep.size, cfg.eps, traffic, p.slot_time, p.coherence_time,
                                   cfg.pilot_tol)
        csi_ul = plan.num_sequences * p.ul_pilot_unit_energy
        meta.update(pilots=plan.num_sequences, collision=plan.collision,
                    fp_iterations=plan.iterations_used, rate=traffic.rate)
    meta["csi_ul"] = csi_ul

    energy_ci = 0.0
    if scheme is Scheme.CSI_SDP:
        kw = {"t_s": cfg.t_s} if cfg.traffic == "periodic" else {"traffic": traffic}
        energy, energy_ci, _ = simulate_energy_outage_sdp(p, dep, csi_ul, cfg.sdp_trials, rng, **kw)
        meta["sdp_trials"] = cfg.sdp_trials
    elif cfg.traffic == "periodic":
        energy = energy_outage_periodic(p, beta, cfg.t_s, csi_ul, scheme)
    else:
        energy = energy_outage_poisson(p, beta, traffic, csi_ul, scheme)

    # SA powers from one antenna at a time and receives on the rest
    up = p.with_(antennas_tx=1) if scheme is Scheme.SA else p
    opts = UplinkOptions(cfg.si_attenuation, cfg.near_field_gain, cfg.imperfect_csi, csi_ul)
    if cfg.traffic == "periodic":
        est = info_outage_periodic(up, dep, cfg.t_s, cfg.equalizer, cfg.trials, rng, opts)
    else:
        est = info_outage_poisson(up, dep, traffic, plan, cfg.equalizer, cfg.trials, rng,
                                  options=opts)
    meta["trials"] = cfg.trials
    meta["rx_antennas"] = up.antennas_rx
    return OutageBreakdown(energy, est.value, overall_outage(energy, est.value),
                           energy_ci + est.ci_half_width, meta)


def _run_point(args):
    cfg, index, value = args
    try:
        return evaluate_point(cfg.at(value), trial_rng(cfg.seed, index))
    except Exception as exc:
        raise RuntimeError(f"{cfg.sweep_param}={value!r}: {exc}") from exc


def run_sweep(config: ScenarioConfig) -> list[dict]:
    """Evaluate every grid point; rows come back in grid order.

    Point ``i`` draws from the substream ``(seed, i)``, so the table does not
    depend on ``workers``.
    """
    jobs = [(config, i, v) for i, v in enumerate(config.sweep_values)]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(j) for j in jobs]
    rows = []
    for (_, _, value), res in zip(jobs, results):
        rows.append({"value": value, "energy": res.energy, "info": res.info,
                     "overall": res.overall, "ci": res.ci_half_width,
                     "pilots": res.meta.get("pilots", ""),
                     "fp_iterations": res.meta.get("fp_iterations", ""),
                     "csi_ul": res.meta["csi_ul"], "trials": res.meta["trials"]})
    return rows


def table_header(config: ScenarioConfig) -> list[str]:
    unit = UNITS.get(config.sweep_param, "-")
    return [f"{config.sweep_param} [{unit}]", "energy_outage [-]", "info_outage [-]",
            "overall_outage [-]", "ci_half_width [-]", "pilots [-]", "fp_iterations [-]",
            "csi_ul [J]", "trials [-]"]


def write_table(rows: list[dict], config: ScenarioConfig, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(table_header(config))
    for r in rows:
        w.writerow([r["value"], f"{r['energy']:.10e}", f"{r['info']:.10e}",
                    f"{r['overall']:.10e}", f"{r['ci']:.3e}", r["pilots"],
                    r["fp_iterations"], f"{r['csi_ul']:.6e}", r["trials"]])

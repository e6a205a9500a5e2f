"""Energy side of the link: CSI costs, harvest statistics and energy outage.

Energy outage is evaluated at the weakest device. For CSI-based powering the
MRT beam aimed at that device gives a lower bound on the worst-case outage;
for the switching-antenna (SA) scheme the same expressions are exact once the
CSI cost is dropped, the power split over M antennas, and the beam width set
to M.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .beamforming import solve_fair_beamforming
from .numerics import (DiscreteExp, NoncentralChi2, binomial_ci, default_vmax,
                       discrete_exp_pmf, discrete_exp_sample, marcum_q_complement,
                       nc_chi2_sample)
from .scenario import Deployment, SystemParams, sample_rician

_ROUND = 1e-9


class Scheme(str, enum.Enum):
    CSI_MRT = "CSI_MRT"
    CSI_SDP = "CSI_SDP"
    SA = "SA"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown WET scheme {value!r}; expected one of "
                             f"{[s.value for s in cls]}") from None


class TruncationError(ValueError):
    """Inter-arrival sum truncated earlier than ``ceil(10 E[V])``."""


def blocks_per_period(t_s: float, coherence_time: float) -> int:
    """``ceil(t_s / T_c)``, tolerant to float noise such as 1.6/0.4."""
    return math.ceil(t_s / coherence_time - _ROUND)


@dataclass(frozen=True)
class EnergyBudget:
    csi_dl: float
    csi_ul: float
    circuit: float
    tx: float

    def __post_init__(self):
        for name in ("csi_dl", "csi_ul", "circuit", "tx"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def total(self) -> float:
        return self.csi_dl + self.csi_ul + self.circuit + self.tx


def csi_cost_downlink(params: SystemParams) -> float:
    """Per-block downlink CSI energy, linear in the number of powering antennas."""
    if params.antennas_tx < 1:
        raise ValueError("CSI-based powering needs at least one transmit antenna")
    return params.antennas_tx * params.dl_pilot_unit_energy


def _effective(params: SystemParams, scheme) -> tuple[float, int, float]:
    """(power, beam width, per-block CSI cost) after the SA substitutions."""
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.SA:
        m = params.antennas_total
        return params.hap_power / m, m, 0.0
    if scheme is Scheme.CSI_MRT:
        return params.hap_power, params.antennas_tx, csi_cost_downlink(params)
    raise ValueError("CSI_SDP has no closed-form outage; use simulate_energy_outage_sdp")


def periodic_budget(params: SystemParams, t_s: float, csi_ul: float, scheme) -> EnergyBudget:
    if t_s < params.slot_time * (1 - _ROUND):
        raise ValueError(f"t_s={t_s} shorter than one slot")
    _, _, xi_dl = _effective(params, scheme)
    n = blocks_per_period(t_s, params.coherence_time)
    return EnergyBudget(n * xi_dl, csi_ul, params.circuit_power * t_s,
                        params.tx_power * params.slot_time)


def poisson_budget(params: SystemParams, v: int, csi_ul: float, scheme) -> EnergyBudget:
    _, _, xi_dl = _effective(params, scheme)
    return EnergyBudget(v * xi_dl, csi_ul, params.circuit_power * v * params.coherence_time,
                        params.tx_power * params.slot_time)


def _block_outage(params: SystemParams, beta: float, blocks: int, budget: float,
                  power: float, width: int) -> float:
    """P[harvest over ``blocks`` coherence blocks < budget]."""
    k = params.rician_k
    order = width * blocks
    a = math.sqrt(2.0 * width * k * blocks)
    b = math.sqrt(2.0 * budget * (k + 1.0)
                  / (params.conversion_eff * params.coherence_time * power * beta))
    return marcum_q_complement(order, a, b)


def energy_outage_periodic(params: SystemParams, beta_worst: float, t_s: float,
                           csi_ul: float, scheme=Scheme.CSI_MRT) -> float:
    """Energy outage of the weakest device when it reports every ``t_s`` seconds."""
    power, width, _ = _effective(params, scheme)
    budget = periodic_budget(params, t_s, csi_ul, scheme).total
    n = blocks_per_period(t_s, params.coherence_time)
    return _block_outage(params, beta_worst, n, budget, power, width)


def energy_outage_poisson(params: SystemParams, beta_worst: float, traffic: DiscreteExp,
                          csi_ul: float, scheme=Scheme.CSI_MRT, v_max: int | None = None,
                          allow_truncation: bool = False) -> float:
    """Energy outage under Poisson reporting, averaged over the inter-arrival law.

    Terms beyond ``v_max`` are counted as outage, so the result overshoots the
    untruncated value by at most ``exp(-rate * v_max)``.
    """
    prescribed = default_vmax(traffic)
    if v_max is None:
        v_max = prescribed
    elif v_max < prescribed:
        msg = f"v_max={v_max} below the prescribed ceil(10 E[V]) = {prescribed}"
        if not allow_truncation:
            raise TruncationError(msg)
        warnings.warn(msg, stacklevel=2)
    power, width, _ = _effective(params, scheme)
    total = 0.0
    for v in range(1, v_max + 1):
        budget = poisson_budget(params, v, csi_ul, scheme).total
        total += discrete_exp_pmf(traffic, v) * _block_outage(
            params, beta_worst, v, budget, power, width)
    return min(1.0, total + math.exp(-traffic.rate * v_max))


# -- harvest statistics -----------------------------------------------------

def mrt_crossgain(kappa: float, m_t: int) -> float:
    """Fitted mean gain ``E[E_rf]/(P beta)`` of a device not targeted by the MRT beam."""
    if kappa < 0 or m_t < 1:
        raise ValueError("need kappa >= 0 and m_t >= 1")
    return 0.25 * (kappa / (1.0 + kappa / math.sqrt(2.0))) ** 2 * m_t + 1.0 / (1.0 + kappa / 2.0)


def omega_metric(deployment: Deployment, kappa: float, m_t: int) -> float:
    """Mean power at the best-placed other device relative to the MRT target.

    Large values mean MRT towards the weakest device is likely the max-min
    optimum; above 1 it is optimal at least half of the time.
    """
    gains = deployment.as_array()
    if gains.size < 2:
        raise ValueError("omega needs at least two devices")
    worst = deployment.worst_index
    others = np.delete(gains, worst)
    return mrt_crossgain(kappa, m_t) / m_t * float(others.min()) / gains[worst]


def sa_incident_sample(params: SystemParams, beta: float, rng: np.random.Generator, size=None):
    """Incident RF power at a device under SA, averaged over one coherence block."""
    m, k = params.antennas_total, params.rician_k
    x = nc_chi2_sample(NoncentralChi2(2 * m, 2 * m * k), rng, size)
    return params.hap_power * beta / (2 * m * (1 + k)) * x


# -- Monte Carlo harvest simulation ---------------------------------------------

def _block_harvest(params: SystemParams, beta: float, scheme: Scheme, blocks: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Energy harvested in each of ``blocks`` coherence blocks from fresh channels."""
    k = params.rician_k
    eta_tc = params.conversion_eff * params.coherence_time
    if scheme is Scheme.SA:
        m = params.antennas_total
        h = sample_rician(m, k, rng, blocks)
        # each antenna radiates P for T_c/M seconds
        return eta_tc * params.hap_power / m * beta * np.sum(np.abs(h) ** 2, axis=-1)
    h = sample_rician(params.antennas_tx, k, rng, blocks)
    w = h.conj() / np.linalg.norm(h, axis=-1, keepdims=True)
    return eta_tc * params.hap_power * beta * np.abs(np.sum(h * w, axis=-1)) ** 2


def simulate_energy_outage_periodic(params: SystemParams, beta_worst: float, t_s: float,
                                    csi_ul: float, scheme, trials: int,
                                    rng: np.random.Generator, batch: int = 200_000):
    """Event-level estimate: sum per-block harvests from drawn channels, compare to budget.

    Returns ``(estimate, ci_half_width)``.
    """
    scheme = Scheme.parse(scheme)
    budget = periodic_budget(params, t_s, csi_ul, scheme).total
    n = blocks_per_period(t_s, params.coherence_time)
    fails = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        e = _block_harvest(params, beta_worst, scheme, b * n, rng).reshape(b, n).sum(axis=1)
        fails += int(np.count_nonzero(e < budget))
        done += b
    return fails / trials, binomial_ci(fails, trials)


def simulate_energy_outage_poisson(params: SystemParams, beta_worst: float,
                                   traffic: DiscreteExp, csi_ul: float, scheme, trials: int,
                                   rng: np.random.Generator, batch: int = 100_000):
    """Event-level estimate with a random number of harvesting blocks per report."""
    scheme = Scheme.parse(scheme)
    _, _, xi_dl = _effective(params, scheme)
    fails = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        v = discrete_exp_sample(traffic, rng, b)
        per_block = _block_harvest(params, beta_worst, scheme, int(v.sum()), rng)
        starts = np.concatenate(([0], np.cumsum(v)[:-1]))
        harvest = np.add.reduceat(per_block, starts)
        budget = (v * (xi_dl + params.circuit_power * params.coherence_time)
                  + csi_ul + params.tx_power * params.slot_time)
        fails += int(np.count_nonzero(harvest < budget))
        done += b
    return fails / trials, binomial_ci(fails, trials)


def simulate_energy_outage_sdp(params: SystemParams, deployment: Deployment, csi_ul: float,
                               trials: int, rng: np.random.Generator, t_s: float | None = None,
                               traffic: DiscreteExp | None = None, tol: float = 1e-4):
    """Worst-device energy outage with the max-min beamformer re-solved every block.

    Give ``t_s`` for periodic reporting or ``traffic`` for Poisson reporting.
    Returns ``(sup_i outage_i, ci_half_width, per-device outage array)``.
    Expensive: one beamforming solve per coherence block and trial.
    """
    if (t_s is None) == (traffic is None):
        raise ValueError("give exactly one of t_s (periodic) or traffic (Poisson)")
    gains = deployment.as_array()
    S = gains.size
    eta_tc = params.conversion_eff * params.coherence_time
    fails = np.zeros(S, dtype=np.int64)
    for _ in range(trials):
        if traffic is None:
            blocks = blocks_per_period(t_s, params.coherence_time)
            budget = periodic_budget(params, t_s, csi_ul, Scheme.CSI_MRT).total
        else:
            blocks = discrete_exp_sample(traffic, rng)
            budget = poisson_budget(params, blocks, csi_ul, Scheme.CSI_MRT).total
        harvest = np.zeros(S)
        for _ in range(blocks):
            H = sample_rician(params.antennas_tx, params.rician_k, rng, S)
            pre = solve_fair_beamforming(H, gains, params.hap_power, tol=tol)
            power = np.zeros(S)
            for w in pre.beams:
                power += np.abs(H @ w) ** 2
            harvest += eta_tc * params.hap_power * gains * power
        fails += harvest < budget
    per_device = fails / trials
    worst = int(np.argmax(per_device))
    return float(per_device[worst]), binomial_ci(int(fails[worst]), trials), per_device

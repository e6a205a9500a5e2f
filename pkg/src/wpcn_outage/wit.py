"""Uplink decoding: ZF/MMSE SINRs and semi-analytic information outage.

Outage at the weakest device is ``P[gamma < 2^{k/t} - 1]``. The traffic is
not simulated; only the SINR statistic is sampled from fresh channels, which
keeps the estimators cheap and lets different equalizers share draws.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .numerics import DiscreteExp, binomial_ci
from .pilots import PilotPlan, active_probability
from .scenario import Deployment, SystemParams, sample_rician

COND_LIMIT = 1e12
_ROUND = 1e-9


class Equalizer(str, enum.Enum):
    ZF = "ZF"
    MMSE = "MMSE"

    @classmethod
    def parse(cls, value) -> "Equalizer":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown equalizer {value!r}; expected ZF or MMSE") from None


@dataclass
class UplinkInstance:
    channel: np.ndarray  # M_r x N, active devices only
    powers: np.ndarray  # p_i beta_i per active device
    noise_power: float
    target_index: int = -1

    def __post_init__(self):
        self.channel = np.atleast_2d(np.asarray(self.channel, dtype=complex))
        self.powers = np.asarray(self.powers, dtype=float).ravel()
        if self.channel.shape[1] < 1:
            raise ValueError("need at least one stream")
        if self.powers.size != self.channel.shape[1]:
            raise ValueError("one power weight per channel column required")
        if np.any(self.powers <= 0) or not self.noise_power > 0:
            raise ValueError("powers and noise must be positive")


@dataclass
class OutageEstimate:
    value: float
    ci_half_width: float
    trials: int
    failures: int
    meta: dict = field(default_factory=dict)


def pilot_cost_periodic(S: int, t_s: float, t: float, unit: float) -> float:
    """Uplink pilot energy when ``ceil(S / floor(t_s/t))`` devices share a slot."""
    slots = math.floor(t_s / t + _ROUND)
    if slots < 1:
        raise ValueError(f"period {t_s} holds no slot of length {t}")
    return math.ceil(S / slots) * unit


def concurrent_streams(S: int, t_s: float, t: float) -> int:
    slots = math.floor(t_s / t + _ROUND)
    if slots < 1:
        raise ValueError(f"period {t_s} holds no slot of length {t}")
    return math.ceil(S / slots)


def self_interference_power(hap_power: float, m_t: int, attenuation: float,
                            near_field_gain: float = 1.0) -> float:
    """Residual powering signal per receive antenna after cancellation.

    Each of the ``m_t`` powering antennas radiates ``P/m_t`` through a
    constant near-field gain; ``attenuation`` lumps path loss and SIC depth.
    """
    if attenuation < 0 or near_field_gain < 0:
        raise ValueError("attenuation and near-field gain must be nonnegative")
    return m_t * (hap_power / max(m_t, 1)) * near_field_gain * attenuation


# -- SINRs ---------------------------------------------------------------------

def zf_equalizer(inst: UplinkInstance) -> np.ndarray:
    A = inst.channel * np.sqrt(inst.powers)
    return np.linalg.solve(A.conj().T @ A, A.conj().T)


def zf_sinrs(inst: UplinkInstance) -> np.ndarray:
    """Per-stream ZF SINR; zero for every stream when ZF cannot separate them."""
    H = inst.channel
    m_r, n = H.shape
    if n > m_r:
        return np.zeros(n)
    gram = H.conj().T @ H
    if np.linalg.cond(gram) >= COND_LIMIT:
        return np.zeros(n)
    z = 1.0 / np.linalg.inv(gram).diagonal().real
    return inst.powers * z / inst.noise_power


def mmse_sinrs(inst: UplinkInstance) -> np.ndarray:
    H, w, s2 = inst.channel, inst.powers, inst.noise_power
    m_r, n = H.shape
    out = np.empty(n)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        A = np.eye(m_r, dtype=complex)
        if others:
            Ho = H[:, others] * np.sqrt(w[others] / s2)
            A = A + Ho @ Ho.conj().T
        h = H[:, i]
        out[i] = w[i] / s2 * np.real(h.conj() @ np.linalg.solve(A, h))
    return out


def _target_sinr(H, w, s2, equalizer: Equalizer, H_est=None):
    """Batched SINR of the last stream.

    ``H`` is (trials, M_r, N) and ``w`` (trials, N) holds ``p_i beta_i``.
    With ``H_est`` the combiner is built from the estimate and applied to ``H``.
    """
    T, m_r, n = H.shape
    if m_r == 0:
        return np.zeros(T)
    if H_est is not None:
        return _mismatched_sinr(H, H_est, w, s2, equalizer)
    h = H[:, :, -1]
    if equalizer is Equalizer.ZF:
        if n > m_r:
            return np.zeros(T)
        gram = np.conj(np.swapaxes(H, 1, 2)) @ H
        ok = np.linalg.cond(gram) < COND_LIMIT
        z = np.zeros(T)
        if np.any(ok):
            inv = np.linalg.inv(gram[ok])
            z[ok] = 1.0 / inv[:, -1, -1].real
        return w[:, -1] * z / s2
    if n == 1:
        return w[:, -1] * np.sum(np.abs(h) ** 2, axis=1) / s2
    Ho = H[:, :, :-1] * np.sqrt(w[:, None, :-1] / s2)
    A = np.eye(m_r) + Ho @ np.conj(np.swapaxes(Ho, 1, 2))
    x = np.linalg.solve(A, h[:, :, None])[:, :, 0]
    return w[:, -1] / s2 * np.real(np.sum(h.conj() * x, axis=1))


def _mismatched_sinr(H, H_est, w, s2, equalizer):
    T, m_r, n = H.shape
    if equalizer is Equalizer.ZF:
        if n > m_r:
            return np.zeros(T)
        gram = np.conj(np.swapaxes(H_est, 1, 2)) @ H_est
        ok = np.linalg.cond(gram) < COND_LIMIT
        q = np.zeros((T, m_r), dtype=complex)
        if np.any(ok):
            sol = np.linalg.solve(gram[ok], np.eye(n)[None, :, -1:].repeat(ok.sum(), 0))
            q[ok] = (H_est[ok] @ sol)[:, :, 0]
    else:
        Ho = H_est[:, :, :-1] * np.sqrt(w[:, None, :-1])
        A = s2 * np.eye(m_r) + Ho @ np.conj(np.swapaxes(Ho, 1, 2))
        q = np.linalg.solve(A, H_est[:, :, -1:])[:, :, 0]
    gains = np.abs(np.einsum("tm,tmn->tn", q.conj(), H)) ** 2 * w
    signal = gains[:, -1]
    interference = gains[:, :-1].sum(axis=1)
    noise = s2 * np.sum(np.abs(q) ** 2, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sinr = np.where(noise > 0, signal / (interference + noise), 0.0)
    return sinr


def impaired_uplink_channel(params: SystemParams, true_channel, csi_ul: float,
                            rng: np.random.Generator):
    """Split a channel into an estimate and an uncorrelated estimation error.

    With ``rho = (xi/t_p) / (xi/t_p + sigma^2)`` the estimate keeps the LOS
    mean and a fraction ``rho`` of the scattered variance, the error the rest.
    """
    if csi_ul < 0:
        raise ValueError("pilot energy must be nonnegative")
    h = np.asarray(true_channel, dtype=complex)
    k = params.rician_k
    snr = csi_ul / params.pilot_symbol_time
    rho = snr / (snr + params.noise_power)
    mean = math.sqrt(k / (1.0 + k))
    spread = math.sqrt(rho * (1.0 - rho) / (1.0 + k) / 2.0)
    noise = spread * (rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape))
    estimate = mean + rho * (h - mean) + noise
    return estimate, h - estimate


# -- outage estimators ---------------------------------------------------------------

@dataclass
class UplinkOptions:
    """Non-default uplink impairments.

    ``si_attenuation`` of 0 means perfect self-interference cancellation;
    ``imperfect_csi`` builds combiners from estimated channels using
    ``csi_ul`` as the pilot energy.
    """

    si_attenuation: float = 0.0
    near_field_gain: float = 1.0
    imperfect_csi: bool = False
    csi_ul: float = 0.0


def _noise(params: SystemParams, opts: UplinkOptions) -> float:
    if opts.si_attenuation == 0:
        return params.noise_power
    return params.noise_power + self_interference_power(
        params.hap_power, params.antennas_tx, opts.si_attenuation, opts.near_field_gain)


def _draw_group(params, weights, equalizer, rng, opts, noise):
    """Target-stream SINRs for a batch sharing one stream count."""
    T, n = weights.shape
    m_r = params.antennas_rx
    H = np.swapaxes(sample_rician(m_r, params.rician_k, rng, (T, n)), 1, 2) if m_r else \
        np.zeros((T, 0, n), dtype=complex)
    H_est = None
    if opts.imperfect_csi and m_r:
        H_est, _ = impaired_uplink_channel(params, H, opts.csi_ul, rng)
    return _target_sinr(H, weights, noise, equalizer, H_est)


def info_outage_periodic(params: SystemParams, deployment: Deployment, t_s: float,
                         equalizer, trials: int, rng: np.random.Generator,
                         options: UplinkOptions | None = None,
                         batch: int = 50_000) -> OutageEstimate:
    """Information outage of the weakest device under synchronized reporting.

    The ``N = ceil(S / floor(t_s/t))`` devices with the smallest gains share
    the weakest device's slot.
    """
    equalizer = Equalizer.parse(equalizer)
    opts = options or UplinkOptions()
    if trials < 1:
        raise ValueError("trials must be >= 1")
    S = deployment.size
    n = concurrent_streams(S, t_s, params.slot_time)
    gains = deployment.as_array()
    order = np.argsort(gains, kind="stable")
    group = order[:n][::-1]  # weakest last
    weights = params.tx_power * gains[group]
    noise = _noise(params, opts)
    threshold = params.rate_threshold
    fails = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        sinr = _draw_group(params, np.broadcast_to(weights, (b, n)), equalizer, rng, opts, noise)
        fails += int(np.count_nonzero(sinr < threshold))
        done += b
    return OutageEstimate(fails / trials, binomial_ci(fails, trials), trials, fails,
                          {"streams": n, "rx_antennas": params.antennas_rx})


def sample_active_count(S: int, p_active: float, rng: np.random.Generator, size: int):
    """``N ~ Binomial(S, p_active)`` conditioned on ``N >= 1``."""
    ks = np.arange(1, S + 1)
    pmf = stats.binom.pmf(ks, S, p_active)
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    return ks[np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), S - 1)]


def info_outage_poisson(params: SystemParams, deployment: Deployment, traffic: DiscreteExp,
                        plan: PilotPlan, equalizer, trials: int, rng: np.random.Generator,
                        eps_approx: bool = False, options: UplinkOptions | None = None,
                        batch: int = 50_000) -> OutageEstimate:
    """Information outage of the weakest device under random access.

    Collision outage plus, for a collision-free target, the decoding outage
    averaged over the random set of co-active devices: ``N`` is drawn from the
    activity binomial conditioned on ``N >= 1`` and the ``N-1`` interferers
    uniformly from the other devices. Every interferer contributes
    interference whether or not it collided itself.
    """
    equalizer = Equalizer.parse(equalizer)
    opts = options or UplinkOptions()
    if trials < 1:
        raise ValueError("trials must be >= 1")
    S = deployment.size
    if plan.num_devices != S:
        raise ValueError(f"plan built for {plan.num_devices} devices, deployment has {S}")
    gains = deployment.as_array()
    worst = deployment.worst_index
    others = np.delete(np.arange(S), worst)
    p_act = active_probability(traffic, params.slot_time, params.coherence_time)
    noise = _noise(params, opts)
    threshold = params.rate_threshold

    o_col = plan.collision
    if eps_approx and plan.num_sequences < S:
        o_col = plan.target_collision

    fails = 0
    done = 0
    count_hist = {}
    while done < trials:
        b = min(batch, trials - done)
        counts = sample_active_count(S, p_act, rng, b)
        for n in np.unique(counts):
            idx = np.flatnonzero(counts == n)
            m = idx.size
            count_hist[int(n)] = count_hist.get(int(n), 0) + m
            if n > 1:
                keys = rng.random((m, S - 1))
                pick = others[np.argpartition(keys, n - 2, axis=1)[:, : n - 1]]
                w = params.tx_power * np.concatenate(
                    [gains[pick], np.full((m, 1), gains[worst])], axis=1)
            else:
                w = np.full((m, 1), params.tx_power * gains[worst])
            sinr = _draw_group(params, w, equalizer, rng, opts, noise)
            fails += int(np.count_nonzero(sinr < threshold))
        done += b
    decode = fails / trials
    value = o_col + (1.0 - o_col) * decode
    return OutageEstimate(value, (1.0 - o_col) * binomial_ci(fails, trials), trials, fails,
                          {"collision": o_col, "decoding": decode, "active_counts": count_hist})

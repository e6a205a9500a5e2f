"""Deployment geometry, path loss and Rician channel draws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class SystemParams:
    """Physical and protocol constants of the powered network.

    Defaults reproduce the desk-scale reference setup: 10 W HAP, 400 ms
    coherence, 20 ms uplink slots, -94 dBm noise, 20 uW circuit and 200 uW
    transmit power, kappa = 5, k = 1e-3 bits/Hz and six HAP antennas split
    evenly. The per-antenna CSI cost (-20 dBm) and per-symbol pilot cost
    (-30 dBm) are read as energies over a 1 s reference, i.e. watts x 1 s.
    """

    hap_power: float = 10.0
    noise_power: float = field(default_factory=lambda: dbm_to_watts(-94.0))
    conversion_eff: float = 0.25
    rician_k: float = 5.0
    coherence_time: float = 0.4
    slot_time: float = 0.02
    tx_power: float = 200e-6
    circuit_power: float = 20e-6
    dl_pilot_unit_energy: float = field(default_factory=lambda: dbm_to_watts(-20.0))
    ul_pilot_unit_energy: float = field(default_factory=lambda: dbm_to_watts(-30.0))
    spectral_msg: float = 1e-3
    antennas_total: int = 6
    antennas_tx: int = 3
    pilot_symbol_time: float = 70e-6

    def __post_init__(self):
        positive = ("hap_power", "noise_power", "conversion_eff", "coherence_time",
                    "slot_time", "tx_power", "pilot_symbol_time")
        for name in positive:
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val}")
        for name in ("circuit_power", "dl_pilot_unit_energy", "ul_pilot_unit_energy",
                     "spectral_msg", "rician_k"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"{name} must be nonnegative, got {val}")
        if not self.conversion_eff <= 1:
            raise ValueError("conversion_eff must not exceed 1")
        if self.antennas_total < 1 or not 0 <= self.antennas_tx <= self.antennas_total:
            raise ValueError(
                f"need 0 <= antennas_tx <= antennas_total, got {self.antennas_tx}/{self.antennas_total}")
        # slots must fit M times in a coherence block
        if self.slot_time > self.coherence_time / self.antennas_total * (1 + 1e-12):
            raise ValueError(
                f"slot_time {self.slot_time} exceeds coherence_time/antennas_total "
                f"= {self.coherence_time / self.antennas_total}")

    @property
    def antennas_rx(self) -> int:
        return self.antennas_total - self.antennas_tx

    @property
    def rate_threshold(self) -> float:
        """SINR needed to carry ``spectral_msg`` bits/Hz within one slot."""
        return 2.0 ** (self.spectral_msg / self.slot_time) - 1.0

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Deployment:
    """Average channel gains of the devices and the index of the weakest one."""

    gains: tuple[float, ...]
    distances: tuple[float, ...] = ()
    ring_counts: tuple[tuple[float, int], ...] = ()

    def __post_init__(self):
        if len(self.gains) == 0:
            raise ValueError("deployment needs at least one device")
        if any(not (g > 0 and math.isfinite(g)) for g in self.gains):
            raise ValueError("all gains must be positive and finite")

    @property
    def size(self) -> int:
        return len(self.gains)

    @property
    def worst_index(self) -> int:
        return int(np.argmin(self.gains))

    @property
    def worst_gain(self) -> float:
        return self.gains[self.worst_index]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.gains, dtype=float)


def path_gain(distance, pl_exponent: float = 2.7, fixed_loss_db: float = 16.0):
    """Log-distance average gain ``10^{-loss/10} d^{-exponent}``."""
    return 10.0 ** (-fixed_loss_db / 10.0) * np.asarray(distance, dtype=float) ** (-pl_exponent)


def ring_counts(num_devices: int, radii) -> list[int]:
    """Split ``num_devices`` over rings in proportion to ring radius.

    Largest-remainder rounding, ties resolved towards the inner ring.
    """
    radii = np.asarray(radii, dtype=float)
    quotas = num_devices * radii / radii.sum()
    counts = np.floor(quotas).astype(int)
    short = num_devices - counts.sum()
    order = sorted(range(len(radii)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts.tolist()


def ring_deployment(num_devices: int, radii=(2, 4, 6, 8, 10, 12),
                    pl_exponent: float = 2.7, fixed_loss_db: float = 16.0) -> Deployment:
    """Devices on concentric rings, ring populations proportional to circumference."""
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("radii must be nonempty")
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError(f"radii must be positive and strictly increasing, got {radii}")
    if num_devices < len(radii):
        raise ValueError(f"need at least one device per ring: {num_devices} < {len(radii)}")
    counts = ring_counts(num_devices, radii)
    distances = [r for r, c in zip(radii, counts) for _ in range(c)]
    gains = path_gain(distances, pl_exponent, fixed_loss_db)
    return Deployment(tuple(float(g) for g in gains), tuple(distances),
                      tuple(zip(radii, counts)))


def sample_rician(dim: int, kappa: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Rician fading vector(s) ``CN(sqrt(k/(1+k)) 1, I/(1+k))``.

    With ``size`` the result has shape ``(*size, dim)``.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    shape = (dim,) if size is None else (*np.atleast_1d(size), dim)
    los = math.sqrt(kappa / (1.0 + kappa))
    scale = math.sqrt(0.5 / (1.0 + kappa))
    return los + scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

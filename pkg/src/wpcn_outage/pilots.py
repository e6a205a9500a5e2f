"""Random-access activity, pilot collisions and the pilot-count fixed point."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .numerics import DiscreteExp

MAX_FIXED_POINT_ITER = 1000


class FixedPointError(RuntimeError):
    pass


@dataclass(frozen=True)
class PilotPlan:
    num_sequences: int
    target_collision: float
    num_devices: int
    collision: float
    iterations_used: int = 0
    fixed_point: float = float("nan")
    raw_count: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 1 <= self.num_sequences <= self.num_devices:
            raise ValueError(f"need 1 <= L <= S, got L={self.num_sequences}, S={self.num_devices}")

    @property
    def reuse_factor(self) -> float:
        return self.num_sequences / self.num_devices


def active_probability(traffic: DiscreteExp, t: float, T_c: float) -> float:
    """Probability that a device transmits in a given slot."""
    if t > T_c:
        raise ValueError(f"slot {t} longer than coherence time {T_c}")
    return t / T_c * -math.expm1(-traffic.rate)


def _pilot_share(L, traffic, t, T_c):
    return active_probability(traffic, t, T_c) / L


def collision_probability(S: int, L: int, traffic: DiscreteExp, t: float, T_c: float) -> float:
    """Probability that an active device shares its pilot with another active one.

    ``1 - P[N'=1] / (1 - P[N'=0])`` with ``N' ~ Binomial(S, q/L)`` the number
    of active devices on one pilot and ``q`` the per-slot activity.
    """
    if L < 1:
        raise ValueError(f"need at least one pilot, got L={L}")
    if S < 1:
        raise ValueError(f"need at least one device, got S={S}")
    x = _pilot_share(L, traffic, t, T_c)
    if x == 0:
        return 0.0
    log_stay = math.log1p(-x)
    num = S * x * math.exp((S - 1) * log_stay)
    den = -math.expm1(S * log_stay)
    return max(0.0, 1.0 - num / den)


def _g(u: float, S: int) -> float:
    # (1-u)/(1-u^S), stable near u -> 1
    return (1.0 - u) / -math.expm1(S * math.log(u))


def g_tilde(u: float, S: int, eps: float) -> float:
    """Fixed-point map whose root gives the pilot-count threshold."""
    e = 1.0 / (S - 1)
    return ((1.0 - eps) / S) ** e * _g(u, S) ** -e


def g_tilde_slope(u: float, S: int, eps: float) -> float:
    """``|d g_tilde / du|`` in closed form; below 1 on (0, 1), so iteration contracts."""
    e = 1.0 / (S - 1)
    one_minus_us = -math.expm1(S * math.log(u))
    dg = (S * (1.0 - u) * u ** (S - 1) - one_minus_us) / one_minus_us ** 2
    return e * ((1.0 - eps) / S) ** e * _g(u, S) ** (-1.0 - e) * abs(dg)


def optimal_pilot_count(S: int, eps: float, traffic: DiscreteExp, t: float, T_c: float,
                        tol: float = 1e-5) -> PilotPlan:
    """Fewest orthogonal pilots keeping the collision probability at or below ``eps``.

    Solves the fixed point of :func:`g_tilde` from the closed-form initial
    guess, then converts the converged ``u`` to a pilot count. The count is
    checked against the exact collision probability and nudged by single
    steps if the finite tolerance landed it on the wrong side. Counts of at
    least ``S`` collapse to one dedicated pilot per device (no collisions).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if S == 1:
        return PilotPlan(1, eps, 1, 0.0, 0, float("nan"), 1)

    u = (S / (1.0 - eps) - 1.0) ** (-1.0 / (S - 1))
    iters = 0
    delta = math.inf
    while delta > tol:
        if iters >= MAX_FIXED_POINT_ITER:
            raise FixedPointError(f"fixed point not reached in {MAX_FIXED_POINT_ITER} iterations")
        nxt = g_tilde(u, S, eps)
        delta = abs(nxt - u)
        u = nxt
        iters += 1

    share = t * -math.expm1(-traffic.rate) / T_c
    raw = max(1, math.ceil(share / (1.0 - u)))
    L = raw
    steps = 0
    if L < S:
        while L < S and collision_probability(S, L, traffic, t, T_c) > eps:
            L += 1
            steps += 1
        while L > 1 and collision_probability(S, L - 1, traffic, t, T_c) <= eps:
            L -= 1
            steps += 1
    if L >= S:
        return PilotPlan(S, eps, S, 0.0, iters, u, raw, {"correction_steps": steps})
    return PilotPlan(L, eps, S, collision_probability(S, L, traffic, t, T_c), iters, u, raw,
                     {"correction_steps": steps})

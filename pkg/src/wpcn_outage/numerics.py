"""Special functions, distributions and samplers used by the outage expressions.

Marcum-Q is evaluated as a Poisson mixture of regularized incomplete gamma
tails, which handles the integer and half-integer orders that show up when
summing chi-squared harvests over several coherence blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

# absolute bound on the Poisson mass left out of the Marcum-Q series
SERIES_TAIL_TOL = 1e-13


@dataclass(frozen=True)
class NoncentralChi2:
    """Noncentral chi-squared law with ``dof`` degrees of freedom."""

    dof: float
    noncentrality: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.dof) and self.dof > 0):
            raise ValueError(f"dof must be positive, got {self.dof}")
        if not (math.isfinite(self.noncentrality) and self.noncentrality >= 0):
            raise ValueError(f"noncentrality must be >= 0, got {self.noncentrality}")

    @property
    def mean(self) -> float:
        return self.dof + self.noncentrality

    @property
    def var(self) -> float:
        return 2.0 * (self.dof + 2.0 * self.noncentrality)


@dataclass(frozen=True)
class DiscreteExp:
    """Number of coherence blocks between consecutive Poisson arrivals.

    ``P[V = v] = (e^rate - 1) e^{-rate v}`` for ``v >= 1``.
    """

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and 0 < self.rate < 1):
            raise ValueError(f"rate must lie in (0, 1), got {self.rate}")


def _poisson_window(mu: float) -> tuple[int, int]:
    """Index range holding all but ``SERIES_TAIL_TOL`` of a Poisson(mu) mass."""
    if mu == 0:
        return 0, 0
    spread = 12.0 * math.sqrt(mu) + 40.0
    lo = max(0, int(math.floor(mu - spread)))
    hi = int(math.ceil(mu + spread))
    while True:
        left = stats.poisson.cdf(lo - 1, mu) if lo > 0 else 0.0
        right = stats.poisson.sf(hi, mu)
        if left + right <= SERIES_TAIL_TOL:
            return lo, hi
        lo = max(0, lo - int(spread))
        hi += int(spread)


def _check_marcum_args(order, a, b):
    for name, val in (("order", order), ("a", a), ("b", b)):
        if not math.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val}")
    if order <= 0:
        raise ValueError(f"order must be positive, got {order}")
    if a < 0 or b < 0:
        raise ValueError(f"a and b must be nonnegative, got a={a}, b={b}")


def _marcum_series(order: float, a: float, b: float, upper: bool) -> float:
    mu = 0.5 * a * a
    x = 0.5 * b * b
    lo, hi = _poisson_window(mu)
    k = np.arange(lo, hi + 1)
    weights = stats.poisson.pmf(k, mu) if mu > 0 else np.ones(1)
    tails = special.gammaincc(order + k, x) if upper else special.gammainc(order + k, x)
    return float(np.clip(np.dot(weights, tails), 0.0, 1.0))


def marcum_q(order: float, a: float, b: float) -> float:
    """Generalized Marcum Q-function ``Q_order(a, b)``.

    Accepts any positive real order. The result is accurate to about 1e-13
    in absolute terms; use :func:`marcum_q_complement` when ``1 - Q`` is tiny.
    """
    order, a, b = float(order), float(a), float(b)
    _check_marcum_args(order, a, b)
    if b == 0:
        return 1.0
    return _marcum_series(order, a, b, upper=True)


def marcum_q_complement(order: float, a: float, b: float) -> float:
    """``1 - Q_order(a, b)`` summed directly, keeping relative accuracy near 0."""
    order, a, b = float(order), float(a), float(b)
    _check_marcum_args(order, a, b)
    if b == 0:
        return 0.0
    return _marcum_series(order, a, b, upper=False)


def nc_chi2_cdf(dist: NoncentralChi2, y: float) -> float:
    """CDF of a noncentral chi-squared variable, ``1 - Q_{dof/2}(sqrt(nc), sqrt(y))``."""
    if not y >= 0:
        raise ValueError(f"y must be nonnegative, got {y}")
    if math.isinf(y):
        return 1.0
    return marcum_q_complement(dist.dof / 2.0, math.sqrt(dist.noncentrality), math.sqrt(y))


def nc_chi2_sample(dist: NoncentralChi2, rng: np.random.Generator, size=None):
    """Draw from ``dist``.

    One squared shifted normal carries the noncentrality and a gamma draw the
    remaining ``dof - 1`` central degrees of freedom. Below one degree of
    freedom that split is not available and a Poisson mixture is used instead.
    """
    psi = dist.noncentrality
    if dist.dof >= 1:
        z = rng.standard_normal(size) + math.sqrt(psi)
        rest = dist.dof - 1.0
        central = rng.gamma(rest / 2.0, 2.0, size) if rest > 0 else 0.0
        return z * z + central
    k = rng.poisson(psi / 2.0, size)
    return rng.gamma(dist.dof / 2.0 + k, 2.0)


def discrete_exp_pmf(dist: DiscreteExp, v: int) -> float:
    if v < 1:
        raise ValueError(f"v must be >= 1, got {v}")
    lam = dist.rate
    return math.expm1(lam) * math.exp(-lam * v)


def discrete_exp_mean(dist: DiscreteExp) -> float:
    lam = dist.rate
    return math.exp(lam) / math.expm1(lam)


def discrete_exp_sample(dist: DiscreteExp, rng: np.random.Generator, size=None):
    """Inverse-CDF draw: ``V = floor(U) + 1`` with ``U`` exponential of rate ``rate``."""
    u = rng.random(size)
    v = np.floor(-np.log1p(-u) / dist.rate).astype(np.int64) + 1
    return int(v) if size is None else v


def default_vmax(dist: DiscreteExp) -> int:
    """Truncation point ``ceil(10 E[V])`` for sums over the inter-arrival law."""
    return math.ceil(10.0 * discrete_exp_mean(dist))


def trial_rng(seed: int, *counters: int) -> np.random.Generator:
    """Generator for substream ``counters`` of run ``seed``.

    Every (seed, counter...) tuple maps to an independent stream through
    :class:`numpy.random.SeedSequence`, so sweep points can run in any order
    or on any worker and still produce the same numbers.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), *counters]))


def binomial_ci(successes: int, trials: int, z: float = 1.959963984540054) -> float:
    """Wald half-width of a binomial proportion (95% by default)."""
    if trials <= 0 or not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials, trials >= 1; got {successes}/{trials}")
    p = successes / trials
    return z * math.sqrt(p * (1.0 - p) / trials)

"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical code paths; each oracle is a
separate route to the same quantity (quadrature, brute force, event-level
simulation).
"""

import itertools
import math

import numpy as np

# Marcum-Q and noncentral chi-squared CDF values from mpmath quadrature of the
# Bessel-I integrand at 30 digits, rounded to double.
MARCUM_Q = {
    (2, 1.5, 2.0): 0.6552779002523661,
    (1, 0.5, 3.0): 0.017843673386482212,
    (6, 3.0, 2.5): 0.994044480883292,
    (20, 5.0, 9.0): 0.12013944432679455,
}
NC_CHI2_CDF = {(4, 3.0, 5.0): 0.3884149155488384}


def marcum_q_quad(m, a, b, dps=30):
    """Marcum-Q straight from its integral definition."""
    import mpmath as mp

    with mp.workdps(dps):
        a = mp.mpf(a)
        f = lambda x: x * (x / a) ** (m - 1) * mp.e ** (-(x * x + a * a) / 2) * mp.besseli(m - 1, a * x)
        return float(mp.quad(f, [b, b + 5, b + 20, mp.inf]))


def simulate_collisions(S, L, q, slots, rng):
    """Event-level pilot simulation.

    Every slot each device is active with probability ``q`` and picks one of
    ``L`` pilots uniformly. Returns (#pilot-slots with >= 2 users, #pilot-slots
    with >= 1 user).
    """
    active = rng.binomial(S, q, size=slots)
    total = int(active.sum())
    slot_of = np.repeat(np.arange(slots), active)
    pilot = rng.integers(0, L, size=total)
    occ = np.bincount(slot_of * L + pilot, minlength=slots * L)
    return int(np.count_nonzero(occ >= 2)), int(np.count_nonzero(occ >= 1))


def simulate_activity(rate, t, T_c, blocks, rng):
    """Fraction of slots a device transmits in, from its renewal process.

    Reports are separated by ``V`` coherence blocks with ``P[V = v]`` geometric
    in ``exp(-rate)``; each report occupies one random slot of its block.
    """
    p = -math.expm1(-rate)
    gaps = rng.geometric(p, size=blocks)  # P[V=v] = (1-p)^{v-1} p
    times = np.cumsum(gaps)
    reports = np.count_nonzero(times <= blocks)
    slots_per_block = round(T_c / t)
    return reports / (blocks * slots_per_block)


def min_pilots_linear(S, eps, collision):
    """Smallest L in 1..S with ``collision(L) <= eps`` by linear scan; S if none."""
    for L in range(1, S + 1):
        if collision(L) <= eps:
            return L
    return S


def _simplex_grid(dim, n):
    for c in itertools.combinations(range(n + dim - 1), dim - 1):
        parts = np.diff((-1,) + c + (n + dim - 1,)) - 1
        yield parts / n


def maxmin_dual_grid(H, gains, P, coarse=60, zoom=4, levels=6):
    """Max-min incident power by grid search over the dual simplex.

    The optimum equals ``min_pi lambda_max(sum_i pi_i P beta_i g_i g_i^H)``
    with ``g_i = conj(h_i)``. A full grid is laid on the simplex and then
    repeatedly refined around the best point; every evaluated point gives an
    upper bound on the optimum.
    """
    H = np.atleast_2d(H)
    gains = np.asarray(gains, dtype=float)
    B = (H.conj() * np.sqrt(P * gains)[:, None])  # S x M
    outer = np.einsum("im,in->imn", B, B.conj())
    S = len(gains)

    def value(pis):
        G = np.einsum("ki,imn->kmn", pis, outer)
        return np.linalg.eigvalsh(G)[:, -1]

    pts = np.array(list(_simplex_grid(S, coarse)))
    vals = value(pts)
    best = pts[np.argmin(vals)]
    best_val = float(vals.min())
    width = 2.0 / coarse
    for _ in range(levels):
        axes = [np.linspace(-width, width, 2 * zoom + 1)] * (S - 1)
        steps = np.array(list(itertools.product(*axes)))
        cand = best[:-1] + steps
        cand = np.hstack([cand, 1 - cand.sum(axis=1, keepdims=True)])
        cand = cand[np.all(cand >= 0, axis=1)]
        v = value(cand)
        if v.min() < best_val:
            best_val = float(v.min())
            best = cand[np.argmin(v)]
        width /= zoom / 1.5
    return best_val


def maxmin_primal_rank_one_grid(H, gains, P, n_angles=40):
    """Best rank-one beam over a grid of the unit sphere in C^2 (M_t = 2 only).

    A lower bound on the max-min optimum, used with the dual grid to bracket it.
    """
    H = np.atleast_2d(H)
    if H.shape[1] != 2:
        raise ValueError("rank-one grid implemented for two antennas")
    th = np.linspace(0, np.pi / 2, n_angles)
    ph = np.linspace(0, 2 * np.pi, 2 * n_angles, endpoint=False)
    T, F = np.meshgrid(th, ph, indexing="ij")
    W = np.stack([np.cos(T).ravel(), np.sin(T).ravel() * np.exp(1j * F.ravel())], axis=1)
    pw = np.abs(W @ H.T) ** 2 * P * np.asarray(gains)
    return float(pw.min(axis=1).max())

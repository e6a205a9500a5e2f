"""Energy precoders: the max-min fair beamformer and MRT.

Channels enter the incident-power expression as ``h^T w``, so all Gram
matrices here are built from ``conj(h)``: ``Tr(W conj(h) conj(h)^H)`` equals
``sum_j |h^T w_j|^2`` for ``W = sum_j w_j w_j^H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

EIG_DROP = 1e-9


class ConvergenceError(RuntimeError):
    """Raised when the solver exhausts ``max_iter`` above tolerance."""

    def __init__(self, message, best: "Precoder", gap: float, iterations: int):
        super().__init__(message)
        self.best = best
        self.gap = gap
        self.iterations = iterations


@dataclass
class Precoder:
    gram: np.ndarray
    beams: list[np.ndarray]
    objective: float = float("nan")
    upper_bound: float = float("nan")
    iterations: int = 0

    @classmethod
    def from_gram(cls, gram, objective=float("nan"), **kw) -> "Precoder":
        """Split a PSD Gram matrix into eigen-beams ``sqrt(lambda_j) u_j``."""
        gram = np.asarray(gram, dtype=complex)
        gram = 0.5 * (gram + gram.conj().T)
        vals, vecs = np.linalg.eigh(gram)
        keep = vals > EIG_DROP * np.trace(gram).real
        beams = [math.sqrt(v) * vecs[:, j] for j, v in zip(np.flatnonzero(keep), vals[keep])]
        return cls(gram, beams, objective, **kw)

    @property
    def rank(self) -> int:
        return len(self.beams)

    def reconstruct(self) -> np.ndarray:
        m = self.gram.shape[0]
        out = np.zeros((m, m), dtype=complex)
        for w in self.beams:
            out += np.outer(w, w.conj())
        return out


def incident_power(precoder: Precoder, h_dl, beta, P: float):
    """RF power ``P beta sum_j |h^T w_j|^2`` reaching a device.

    ``h_dl`` may be a single channel or a stack of shape ``(..., M_t)``.
    """
    h = np.asarray(h_dl)
    m = precoder.gram.shape[0]
    if h.shape[-1] != m:
        raise ValueError(f"channel length {h.shape[-1]} does not match precoder size {m}")
    total = 0.0
    for w in precoder.beams:
        total = total + np.abs(h @ w) ** 2
    return P * np.asarray(beta) * total


def mrt_precoder(h_worst) -> Precoder:
    h = np.asarray(h_worst, dtype=complex)
    norm = np.linalg.norm(h)
    if not norm > 0:
        raise ValueError("MRT needs a nonzero channel")
    w = h.conj() / norm
    return Precoder(np.outer(w, w.conj()), [w])


def mrt_beams(h):
    """Vectorized single-beam MRT ``conj(h)/||h||`` along the last axis."""
    h = np.asarray(h)
    return h.conj() / np.linalg.norm(h, axis=-1, keepdims=True)


def _fair_values(B, W):
    # B columns are scaled conj-channels g_i; returns g_i^H W g_i
    return np.einsum("mi,mn,ni->i", B.conj(), W, B).real


def _best_mixture(R):
    """Exact max-min weights over a fixed atom set.

    ``R`` is (atoms x devices). Returns weights, the max-min value and the
    dual prices of the device constraints, normalized to the simplex.
    """
    K, S = R.shape
    c = np.zeros(K + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-R.T, np.ones((S, 1))])
    A_eq = np.zeros((1, K + 1))
    A_eq[0, :K] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(S), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * K + [(None, None)], method="highs")
    if res.status != 0:
        raise RuntimeError(f"restricted max-min LP failed: {res.message}")
    prices = np.clip(-res.ineqlin.marginals, 0.0, None)
    total = prices.sum()
    prices = prices / total if total > 0 else np.full(S, 1.0 / S)
    return res.x[:K], float(res.x[-1]), prices


def solve_fair_beamforming(channels_dl, gains, P: float, tol: float = 1e-4,
                           max_iter: int = 2000, worst_index: int | None = None) -> Precoder:
    """Max-min incident power over ``{W >= 0, Tr W = 1}``.

    Fully corrective Frank-Wolfe: the linear step over the spectrahedron is
    the leading eigenvector of ``sum_i pi_i P beta_i H_i`` and adds one
    rank-one atom; the weights of all retained atoms are then re-optimized
    exactly (a small LP). The LP prices ``pi`` certify the upper bound
    ``lambda_max(sum_i pi_i P beta_i H_i)``, and iteration stops once that
    duality gap is below ``tol`` relative to the objective.

    Starts from MRT on the weakest device, so the objective never falls
    below the MRT value.
    """
    H = np.atleast_2d(np.asarray(channels_dl, dtype=complex))
    gains = np.asarray(gains, dtype=float).ravel()
    if H.shape[0] != gains.size:
        raise ValueError(f"{H.shape[0]} channels but {gains.size} gains")
    if gains.size == 0:
        raise ValueError("need at least one channel")
    if np.any(gains <= 0):
        raise ValueError("gains must be positive")
    B = (H.conj() * np.sqrt(P * gains)[:, None]).T  # M_t x S
    scale = float(np.max(np.sum(np.abs(B) ** 2, axis=0)))
    if not scale > 0:
        raise ValueError("all channels are zero")
    Bn = B / math.sqrt(scale)

    if worst_index is None:
        worst_index = int(np.argmin(gains))
    atoms = [mrt_precoder(H[worst_index]).beams[0]]
    R = np.abs(atoms[0].conj() @ Bn)[None, :] ** 2
    weights, low = np.ones(1), float(R[0].min())
    upper = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        weights, low, prices = _best_mixture(R)
        G = (Bn * prices) @ Bn.conj().T
        vals, vecs = np.linalg.eigh(G)
        upper = min(upper, float(vals[-1]))
        if upper - low <= tol * low:
            break
        if it == max_iter:
            break
        # leading eigenvector is the Frank-Wolfe vertex; near-leading ones are
        # cheap extra columns for the corrective step
        new = vecs[:, vals >= 0.5 * vals[-1]].T
        keep = weights > 1e-12
        atoms = [a for a, k in zip(atoms, keep) if k] + list(new)
        R = np.vstack([R[keep], np.abs(new.conj() @ Bn) ** 2])
    if upper - low > tol * low:
        best = _assemble(atoms, weights, B)
        raise ConvergenceError(
            f"no convergence in {max_iter} iterations (gap {(upper - low) * scale:.3e})",
            best, (upper - low) * scale, it)
    pre = _assemble(atoms, weights, B)
    pre.upper_bound = upper * scale
    pre.iterations = it
    return pre


def _assemble(atoms, weights, B) -> Precoder:
    m = B.shape[0]
    W = np.zeros((m, m), dtype=complex)
    for a, w in zip(atoms, weights):
        W += w * np.outer(a, a.conj())
    W /= np.trace(W).real
    return Precoder.from_gram(W, float(_fair_values(B, W).min()))

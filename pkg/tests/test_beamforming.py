import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import maxmin_dual_grid, maxmin_primal_rank_one_grid
from wpcn_outage.beamforming import (ConvergenceError, Precoder, incident_power, mrt_beams,
                                     mrt_precoder, solve_fair_beamforming)
from wpcn_outage.numerics import trial_rng
from wpcn_outage.scenario import ring_deployment, sample_rician


def _instance(seed, m, s, kappa=2.0):
    rng = trial_rng(seed)
    H = sample_rician(m, kappa, rng, s)
    g = rng.uniform(0.1, 1.0, s)
    return H, g


def test_single_device_is_mrt():
    H, g = _instance(0, 3, 1)
    pre = solve_fair_beamforming(H, g, 2.0)
    assert pre.objective == pytest.approx(2.0 * g[0] * np.sum(np.abs(H[0]) ** 2), rel=1e-9)
    assert pre.rank == 1


def test_conjugation_convention():
    h = np.array([1 + 1j, 2 - 0.5j, -1j])
    pre = mrt_precoder(h)
    # h^T w with w = conj(h)/|h| delivers |h|^2
    assert incident_power(pre, h, 1.0, 1.0) == pytest.approx(np.vdot(h, h).real)
    assert np.allclose(mrt_beams(h[None])[0], pre.beams[0])


def test_mrt_zero_channel():
    with pytest.raises(ValueError):
        mrt_precoder(np.zeros(3))


def test_incident_power_dimension_check():
    pre = mrt_precoder(np.ones(3))
    with pytest.raises(ValueError):
        incident_power(pre, np.ones(2), 1.0, 1.0)


def test_precoder_from_gram_roundtrip():
    rng = trial_rng(4)
    A = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    W = A @ A.conj().T
    W /= np.trace(W).real
    pre = Precoder.from_gram(W)
    assert pre.rank == 2
    assert np.allclose(pre.reconstruct(), W, atol=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_against_dual_grid(seed):
    rng = np.random.default_rng(seed)
    m, s = int(rng.integers(2, 4)), int(rng.integers(2, 5))
    H, g = _instance(100 + seed, m, s)
    pre = solve_fair_beamforming(H, g, 1.0, tol=1e-6)
    ref = maxmin_dual_grid(H, g, 1.0)
    assert pre.objective <= ref * (1 + 1e-9)
    assert pre.objective == pytest.approx(ref, rel=1e-3)
    assert pre.upper_bound >= pre.objective * (1 - 1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_two_antenna_bracket(seed):
    H, g = _instance(200 + seed, 2, 3)
    pre = solve_fair_beamforming(H, g, 1.0, tol=1e-6)
    low = maxmin_primal_rank_one_grid(H, g, 1.0)
    assert low <= pre.objective * (1 + 1e-6)
    assert pre.objective <= maxmin_dual_grid(H, g, 1.0) * (1 + 1e-9)


def test_against_cvxpy():
    cp = pytest.importorskip("cvxpy")
    H, g = _instance(9, 3, 6)
    pre = solve_fair_beamforming(H, g, 1.0, tol=1e-6)
    W = cp.Variable((3, 3), hermitian=True)
    z = cp.Variable()
    cons = [W >> 0, cp.real(cp.trace(W)) == 1]
    cons += [z <= g[i] * cp.real(cp.quad_form(H[i].conj(), W)) for i in range(6)]
    cp.Problem(cp.Maximize(z), cons).solve()
    assert pre.objective == pytest.approx(z.value, rel=1e-4)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), m=st.integers(1, 4), s=st.integers(1, 12))
def test_feasible_and_at_least_mrt(seed, m, s):
    H, g = _instance(seed, m, s)
    pre = solve_fair_beamforming(H, g, 1.0)
    assert np.trace(pre.gram).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(pre.gram).min() > -1e-12
    mrt = incident_power(mrt_precoder(H[np.argmin(g)]), H, g, 1.0).min()
    assert pre.objective >= mrt * (1 - 1e-9)
    got = incident_power(pre, H, g, 1.0)
    assert got.min() == pytest.approx(pre.objective, rel=1e-8)
    assert pre.upper_bound - pre.objective <= 1e-4 * pre.objective * (1 + 1e-9)


def test_reference_deployment_converges():
    dep = ring_deployment(100)
    H = sample_rician(3, 5.0, trial_rng(2), 100)
    pre = solve_fair_beamforming(H, dep.as_array(), 10.0)
    assert pre.iterations < 200


def test_convergence_error_carries_best():
    H, g = _instance(3, 4, 30)
    with pytest.raises(ConvergenceError) as err:
        solve_fair_beamforming(H, g, 1.0, tol=1e-12, max_iter=2)
    assert err.value.best.objective > 0
    assert err.value.gap > 0


@pytest.mark.parametrize("kw", [dict(gains=[1.0, 2.0]), dict(gains=[-1.0])])
def test_input_validation(kw):
    with pytest.raises(ValueError):
        solve_fair_beamforming(np.ones((1, 2)), kw["gains"], 1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import MARCUM_Q, NC_CHI2_CDF, marcum_q_quad
from wpcn_outage.numerics import (DiscreteExp, NoncentralChi2, binomial_ci, default_vmax,
                                  discrete_exp_mean, discrete_exp_pmf, discrete_exp_sample,
                                  marcum_q, marcum_q_complement, nc_chi2_cdf, nc_chi2_sample,
                                  trial_rng)


@pytest.mark.parametrize("args,expected", sorted(MARCUM_Q.items()))
def test_marcum_q_frozen_quadrature(args, expected):
    assert marcum_q(*args) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_nc_chi2_cdf_frozen():
    (k, lam, y), expected = next(iter(NC_CHI2_CDF.items()))
    assert nc_chi2_cdf(NoncentralChi2(k, lam), y) == pytest.approx(expected, rel=1e-12)


def test_marcum_q_live_quadrature():
    assert marcum_q(3, 2.2, 1.7) == pytest.approx(marcum_q_quad(3, 2.2, 1.7), rel=1e-11)


def test_marcum_q_limits():
    assert marcum_q(3, 1.0, 0.0) == 1.0
    assert marcum_q_complement(3, 1.0, 0.0) == 0.0
    # a = 0: central chi-squared tail
    assert marcum_q(2, 0.0, 1.3) == pytest.approx(stats.chi2.sf(1.3**2, 4), rel=1e-12)
    assert marcum_q(1, 0.7, 60.0) < 1e-300 or marcum_q(1, 0.7, 60.0) == 0.0


@pytest.mark.parametrize("bad", [(-1, 1, 1), (1, -1, 1), (1, 1, -1), (1, math.nan, 1),
                                 (1, 1, math.inf), (0, 1, 1)])
def test_marcum_q_domain(bad):
    with pytest.raises(ValueError):
        marcum_q(*bad)


@settings(max_examples=60, deadline=None)
@given(m=st.integers(1, 40), a=st.floats(0, 15), b=st.floats(0, 25))
def test_marcum_q_pair_sums_to_one(m, a, b):
    q, c = marcum_q(m, a, b), marcum_q_complement(m, a, b)
    assert 0.0 <= q <= 1.0 and 0.0 <= c <= 1.0
    assert q + c == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 20), a=st.floats(0, 8), b1=st.floats(0, 15), b2=st.floats(0, 15))
def test_marcum_q_decreasing_in_b(m, a, b1, b2):
    lo, hi = sorted((b1, b2))
    assert marcum_q(m, a, lo) >= marcum_q(m, a, hi) - 1e-13


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 30), lam=st.floats(0, 40), y=st.floats(0, 120))
def test_nc_chi2_cdf_matches_scipy(k, lam, y):
    ref = stats.ncx2.cdf(y, k, lam) if lam > 0 else stats.chi2.cdf(y, k)
    assert nc_chi2_cdf(NoncentralChi2(k, lam), y) == pytest.approx(ref, abs=1e-9)


def test_nc_chi2_cdf_edges():
    d = NoncentralChi2(4, 2.0)
    assert nc_chi2_cdf(d, 0.0) == 0.0
    assert nc_chi2_cdf(d, math.inf) == 1.0
    with pytest.raises(ValueError):
        nc_chi2_cdf(d, -1.0)


@pytest.mark.parametrize("dof,nc", [(12, 60.0), (2, 0.0), (0.5, 1.5)])
def test_nc_chi2_sampler_ks(dof, nc):
    d = NoncentralChi2(dof, nc)
    x = nc_chi2_sample(d, trial_rng(11, int(dof * 10)), 20000)
    cdf = (lambda y: stats.ncx2.cdf(y, dof, nc)) if nc > 0 else (lambda y: stats.chi2.cdf(y, dof))
    assert stats.kstest(x, cdf).pvalue > 0.01
    assert x.mean() == pytest.approx(d.mean, rel=0.03)


def test_discrete_exp_pmf_and_mean():
    d = DiscreteExp(0.25)
    v = np.arange(1, 400)
    pmf = np.array([discrete_exp_pmf(d, int(k)) for k in v])
    assert pmf.sum() == pytest.approx(1.0, abs=1e-12)
    assert (v * pmf).sum() == pytest.approx(discrete_exp_mean(d), rel=1e-10)
    assert discrete_exp_mean(d) == pytest.approx(math.exp(0.25) / math.expm1(0.25))
    assert default_vmax(d) == math.ceil(10 * discrete_exp_mean(d))
    with pytest.raises(ValueError):
        discrete_exp_pmf(d, 0)


@pytest.mark.parametrize("rate", [0.0, -0.1, 1.0, 1.5])
def test_discrete_exp_rate_domain(rate):
    with pytest.raises(ValueError):
        DiscreteExp(rate)


def test_discrete_exp_sampler_chi2_gof():
    d = DiscreteExp(0.4)
    x = discrete_exp_sample(d, trial_rng(3), 200000)
    assert x.min() >= 1
    edges = np.arange(1, 15)
    obs = np.array([np.count_nonzero(x == k) for k in edges[:-1]] + [np.count_nonzero(x >= 14)])
    p = np.array([discrete_exp_pmf(d, int(k)) for k in edges[:-1]])
    exp = np.append(p, 1 - p.sum()) * x.size
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_trial_rng_substreams():
    a = trial_rng(7, 1).random(5)
    assert np.array_equal(a, trial_rng(7, 1).random(5))
    assert not np.array_equal(a, trial_rng(7, 2).random(5))


def test_binomial_ci():
    assert binomial_ci(0, 100) == 0.0
    assert binomial_ci(50, 100) == pytest.approx(1.959963984540054 * 0.05)
    with pytest.raises(ValueError):
        binomial_ci(5, 0)

"""Lyapunov and stability exponents: exact formulas and Monte Carlo."""

import math

import numpy as np
import pytest
import scipy.stats

from prodrmt.ensembles import (
    FactorSpec,
    ProductSpec,
    ginibre_spec,
    inverse_mixed_spec,
    make_rng,
    truncated_spec,
)
from prodrmt.exponents import (
    exact_exponents,
    mc_lyapunov,
    mc_stability,
    newman_partial_sum,
    permanental_jpdf,
)
from prodrmt.specfun import DomainError, digamma, trigamma


def test_exact_ginibre_digamma_values():
    stats = exact_exponents(ginibre_spec(2, 2, (0,)))
    assert stats.means[0] == pytest.approx(0.5 * digamma(1.0), rel=1e-14)
    assert stats.means[1] == pytest.approx(0.5 * digamma(2.0), rel=1e-14)
    # trigamma(2) = pi^2/6 - 1, so sigma_2^2 = (pi^2/6 - 1)/4.
    assert stats.sigmas[1] ** 2 == pytest.approx(
        (math.pi ** 2 / 6.0 - 1.0) / 4.0, rel=1e-13)
    assert stats.family == "Ginibre"
    assert not stats.extrapolated


def test_exact_beta_scaling():
    # beta = 1 scalar case: mean = log(2)/2 + psi(1/2)/2 = -gamma/2 - log(2)/2.
    stats = exact_exponents(ginibre_spec(1, 1, (0,)))
    ref = 0.5 * math.log(2.0) + 0.5 * digamma(0.5)
    assert stats.means[0] == pytest.approx(ref, rel=1e-13)
    # beta = 4: half log(1/2) + half psi(2n).
    stats4 = exact_exponents(ginibre_spec(4, 2, (0,)))
    assert stats4.means[0] == pytest.approx(
        0.5 * math.log(0.5) + 0.5 * digamma(2.0), rel=1e-13)


def test_exact_truncated_and_inverse():
    stats = exact_exponents(truncated_spec(2, 3, (0,), (2,)))
    for n in (1, 2, 3):
        ref = 0.5 * (digamma(n) - digamma(n + 2.0))
        assert stats.means[n - 1] == pytest.approx(ref, rel=1e-13)
        var = 0.25 * (trigamma(n) - trigamma(n + 2.0))
        assert stats.sigmas[n - 1] ** 2 == pytest.approx(var, rel=1e-13)
    assert stats.family == "TruncatedUnitary"
    # Inverse factor: negated mean at the reflected level, variance adds.
    mixed = exact_exponents(inverse_mixed_spec(2, 3, (0,), (0,)))
    for n in (1, 2, 3):
        ref = 0.5 * digamma(n) - 0.5 * digamma(3 + 1 - n)
        assert mixed.means[n - 1] == pytest.approx(ref, rel=1e-13)
    assert mixed.family == "Mixed"
    flagged = exact_exponents(truncated_spec(4, 2, (0,), (2,)))
    assert flagged.extrapolated


def test_exact_means_ordered():
    stats = exact_exponents(ginibre_spec(2, 5, (0, 1)))
    assert np.all(np.diff(stats.means) > 0)


@pytest.mark.parametrize("beta", [1, 2, 4])
def test_mc_lyapunov_matches_exact(beta):
    spec = ginibre_spec(beta, 2, (0,))
    stats = exact_exponents(spec)
    res = mc_lyapunov(spec, 2000, 30, seed=61)
    assert res["rejected"] == 0
    z = (res["means"] - np.array(stats.means)) / res["standard_errors"]
    assert np.max(np.abs(z)) < 4.0


def test_mc_lyapunov_inverse_mixed():
    spec = inverse_mixed_spec(2, 2, (0,), (1,))
    stats = exact_exponents(spec)
    res = mc_lyapunov(spec, 2000, 30, seed=67)
    z = (res["means"] - np.array(stats.means)) / res["standard_errors"]
    assert np.max(np.abs(z)) < 4.0


def test_mc_lyapunov_variance_scaling():
    spec = ginibre_spec(2, 2, (0,))
    stats = exact_exponents(spec)
    res = mc_lyapunov(spec, 1500, 60, seed=62)
    sample_var = res["replica_values"].var(axis=0, ddof=1) * 1500
    ratio = sample_var / np.array(stats.sigmas) ** 2
    assert np.all(ratio > 0.5) and np.all(ratio < 2.0)


def test_mc_stability_matches_lyapunov_means():
    spec = ginibre_spec(2, 3, (0,))
    stats = exact_exponents(spec)
    res = mc_stability(spec, 400, 30, seed=63)
    assert res["rejected"] == 0
    z = (res["means"] - np.array(stats.means)) / res["standard_errors"]
    assert np.max(np.abs(z)) < 4.0
    assert res["thetas"].shape == res["xis"].shape


def test_mc_input_guards():
    spec = ginibre_spec(2, 2, (0,))
    with pytest.raises(DomainError):
        mc_lyapunov(spec, 0, 4, seed=1)
    with pytest.raises(DomainError):
        mc_stability(spec, 0, 4, seed=1)
    with pytest.raises(DomainError):
        newman_partial_sum(spec, 3, 10, 4, seed=1)


def test_newman_sum_rule():
    # k = N partial sum equals the sum of all exponents, with an exact
    # check through the determinant identity E log|det X| per step.
    spec = ginibre_spec(2, 3, (0,))
    stats = exact_exponents(spec)
    res = newman_partial_sum(spec, 3, 1000, 20, seed=64)
    total = sum(stats.means)
    assert abs(res["estimate"] - total) < 4.0 * res["standard_error"]
    # k = 1 tracks the top exponent and its variance.
    res1 = newman_partial_sum(spec, 1, 1000, 40, seed=65)
    assert abs(res1["estimate"] - stats.means[-1]) < 4.0 * res1["standard_error"]
    assert res1["scaled_variance"] == pytest.approx(
        stats.sigmas[-1] ** 2, rel=0.8)


def test_permanental_jpdf_scalar_case():
    # N = 1: the permanental density is the plain Gaussian.
    spec = ginibre_spec(2, 1, (0,))
    stats = exact_exponents(spec)
    m_steps = 200
    sd = stats.sigmas[0] / math.sqrt(m_steps)
    for x in (stats.means[0], stats.means[0] + 2 * sd):
        ref = scipy.stats.norm.pdf(x, stats.means[0], sd)
        assert permanental_jpdf(stats, m_steps, [x]) == pytest.approx(ref, rel=1e-12)


def test_permanental_jpdf_separated_peaks():
    # Well-separated exponents: the jpdf at the ordered means is close to
    # the product of the marginal peak heights.
    spec = ginibre_spec(2, 2, (0, 4))
    stats = exact_exponents(spec)
    m_steps = 500
    val = permanental_jpdf(stats, m_steps, list(stats.means))
    ref = np.prod([
        1.0 / math.sqrt(2.0 * math.pi * s ** 2 / m_steps) for s in stats.sigmas
    ])
    assert val == pytest.approx(float(ref), rel=1e-6)
    with pytest.raises(DomainError):
        permanental_jpdf(stats, m_steps, [0.0, 0.0, 0.0])


def test_permanental_marginal_against_mc():
    # Light KS check: replica values of the top exponent against the
    # Gaussian marginal implied by the exact statistics.
    spec = ginibre_spec(2, 2, (0,))
    stats = exact_exponents(spec)
    res = mc_lyapunov(spec, 800, 80, seed=66)
    top = res["replica_values"][:, -1]
    sd = stats.sigmas[-1] / math.sqrt(800)
    ks = scipy.stats.kstest(top, scipy.stats.norm(stats.means[-1], sd).cdf)
    assert ks.pvalue > 1e-3

"""Exact eigenvalue statistics: weights, radii, hole probabilities."""

import math

import numpy as np
import pytest
import scipy.integrate

from prodrmt.ensembles import (
    eigenvalue_radii_batch,
    ginibre_spec,
    inverse_mixed_spec,
    make_rng,
    truncated_spec,
)
from prodrmt.exact_ev import (
    correlations,
    density,
    eigen_model,
    expected_bin_counts,
    hole_probability,
    hole_probability_gamma,
    log_moments,
    prob_all_real,
    radial_cdf,
    radial_density,
    radial_pdf,
    radial_tail,
    weight_values,
)
from prodrmt.specfun import DomainError, UnsupportedParamsError


def test_weight_single_ginibre_is_gaussian():
    model = eigen_model(ginibre_spec(2, 3, (0,)))
    r = np.array([0.1, 0.7, 1.5, 2.5])
    assert np.max(np.abs(weight_values(model, r) - np.exp(-r ** 2))) <= 1e-12


def test_weight_single_truncated_is_beta_law():
    # Single truncated factor: w(r) = r^{2 nu} (1 - r^2)^{kappa-nu-1} / Gamma(kappa-nu).
    nu, kappa = 1, 4
    model = eigen_model(truncated_spec(2, 2, (nu,), (kappa,)))
    r = np.array([0.2, 0.5, 0.9])
    ref = r ** (2 * nu) * (1 - r ** 2) ** (kappa - nu - 1) / math.gamma(kappa - nu)
    assert np.max(np.abs(weight_values(model, r) / ref - 1.0)) <= 1e-10
    assert weight_values(model, np.array([1.5]))[0] == 0.0


def test_log_moments_two_factor_product():
    spec = ginibre_spec(2, 3, (0, 2))
    logs = log_moments(spec)
    for k in range(3):
        ref = math.log(math.pi) + math.lgamma(k + 1) + math.lgamma(k + 3)
        assert logs[k] == pytest.approx(ref, rel=1e-14)


def test_radial_pdf_normalized():
    model = eigen_model(inverse_mixed_spec(2, 3, (0,), (1,)))
    for k in (1, 3):
        mass, _ = scipy.integrate.quad(
            lambda r, kk=k: float(radial_pdf(model, kk, np.array([r]))[0]),
            0.0, np.inf, limit=200)
        assert mass == pytest.approx(1.0, abs=1e-9)


def test_radial_density_matches_angular_integral():
    # Rotation invariance: 2 pi r R_1(r e^{i theta}) equals the radius density.
    model = eigen_model(ginibre_spec(2, 3, (0, 1)))
    r = np.array([0.4, 1.0, 1.8])
    lhs = 2.0 * math.pi * r * density(model, r.astype(complex))
    assert np.max(np.abs(lhs / radial_density(model, r) - 1.0)) <= 1e-10


def test_radial_tail_limits_and_monotone():
    model = eigen_model(ginibre_spec(2, 2, (0,)))
    r = np.linspace(0.0, 4.0, 30)
    tail = radial_tail(model, 2, r)
    assert tail[0] == 1.0
    assert np.all(np.diff(tail) <= 1e-14)
    assert radial_tail(model, 2, np.array([np.inf]))[0] == 0.0
    assert radial_cdf(model, 2, np.array([6.0]))[0] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        radial_tail(model, 3, r)


def test_expected_bin_counts_total_mass():
    model = eigen_model(ginibre_spec(2, 4, (0, 1)))
    edges = np.array([0.0, 0.5, 1.0, 2.0, np.inf])
    counts = expected_bin_counts(model, edges, 1000)
    assert counts.sum() == pytest.approx(4000.0, rel=1e-12)
    assert np.all(counts > 0)


def test_hole_probability_three_ways():
    spec = ginibre_spec(2, 3, (1,))
    model = eigen_model(spec)
    for r in (0.4, 0.9):
        closed = hole_probability(model, r, method="closed")
        quad = hole_probability(model, r, method="quadrature")
        gamma = hole_probability_gamma(spec, r)
        assert closed == pytest.approx(quad, rel=1e-8)
        assert closed == pytest.approx(gamma, rel=1e-10)
    assert hole_probability(model, 0.0) == 1.0
    with pytest.raises(DomainError):
        hole_probability(model, 0.5, method="bogus")
    with pytest.raises(UnsupportedParamsError):
        hole_probability_gamma(truncated_spec(2, 2, (0,), (2,)), 0.5)


def test_beta4_density_vanishes_on_axis():
    model = eigen_model(ginibre_spec(4, 3, (0,)))
    vals = density(model, np.array([0.5 + 0.0j, 1.2 + 0.0j]))
    assert np.max(np.abs(vals)) <= 1e-13
    above = density(model, np.array([0.5 + 0.4j]))[0]
    assert above > 0


def test_beta2_correlations_structure():
    model = eigen_model(ginibre_spec(2, 5, (0,)))
    z1, z2 = 0.5 + 0.2j, -1.1 - 0.9j
    r1 = density(model, np.array([z1, z2]))
    r2 = correlations(model, np.array([z1, z2]))
    assert r2 == pytest.approx(float(r1[0] * r1[1]), rel=0.05)
    assert correlations(model, np.array([z1, z1])) == pytest.approx(0.0, abs=1e-12)


def test_prob_all_real_known_values():
    # Real Ginibre: P(all real) = 2^{-N(N-1)/4}.
    assert prob_all_real(ginibre_spec(1, 2, (0,))) == pytest.approx(
        2.0 ** -0.5, rel=1e-9)
    assert prob_all_real(ginibre_spec(1, 4, (0,))) == pytest.approx(
        0.125, rel=1e-8)
    # Two factors, N = 2: probability pi/4.
    assert prob_all_real(ginibre_spec(1, 2, (0, 0))) == pytest.approx(
        math.pi / 4.0, rel=1e-9)
    with pytest.raises(UnsupportedParamsError):
        prob_all_real(ginibre_spec(2, 2, (0,)))
    with pytest.raises(UnsupportedParamsError):
        prob_all_real(ginibre_spec(1, 3, (0,)))


def test_mean_squared_radius_against_sampling():
    spec = ginibre_spec(2, 2, (0, 1))
    model = eigen_model(spec)
    exact = 0.0
    for k in (1, 2):
        val, _ = scipy.integrate.quad(
            lambda r, kk=k: r * r * float(radial_pdf(model, kk, np.array([r]))[0]),
            0.0, np.inf, limit=200)
        exact += val
    radii = eigenvalue_radii_batch(spec, 4000, make_rng(41))
    sq = (radii ** 2).sum(axis=1)
    z = (sq.mean() - exact) / (sq.std(ddof=1) / math.sqrt(len(sq)))
    assert abs(z) < 4.0

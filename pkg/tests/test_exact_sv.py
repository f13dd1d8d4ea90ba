"""Exact squared-singular-value statistics: biorthogonal systems and kernels."""

import math

import numpy as np
import pytest
import scipy.special

from prodrmt.ensembles import (
    FactorSpec,
    ProductSpec,
    ginibre_spec,
    inverse_mixed_spec,
    make_rng,
    squared_singular_value_batch,
    truncated_spec,
)
from prodrmt.exact_sv import (
    check_multiple_orthogonality,
    check_recurrence,
    correlations,
    gram_matrix,
    kernel_contour,
    kernel_sum,
    log_h,
    poly_values,
    psi_log_mellin,
    psi_values,
    sv_density,
    sv_system,
    weight_values,
)
from prodrmt.specfun import DomainError, UnsupportedParamsError


def test_single_factor_reduces_to_laguerre():
    # One Ginibre factor: p_n is the monic associated Laguerre polynomial
    # (-1)^n n! L_n^{(nu)}(x) and psi_n(x) = x^nu e^{-x} p_n(x).
    nu = 2
    system = sv_system(ginibre_spec(2, 4, (nu,)))
    x = np.array([0.3, 1.1, 2.7, 5.5])
    for n in (0, 1, 2, 3):
        lag = scipy.special.genlaguerre(n, nu)(x)
        ref = (-1.0) ** n * math.factorial(n) * lag
        assert np.max(np.abs(poly_values(system, n, x) / ref - 1.0)) <= 1e-11
        psi_ref = x ** nu * np.exp(-x) * ref
        assert np.max(np.abs(psi_values(system, n, x) / psi_ref - 1.0)) <= 1e-9


def test_single_factor_norms():
    # h_n = n! Gamma(nu + n + 1) for one Ginibre factor.
    system = sv_system(ginibre_spec(2, 3, (1,)))
    for n in (0, 1, 2):
        ref = math.lgamma(n + 1) + math.lgamma(n + 2)
        assert log_h(system, n) == pytest.approx(ref, rel=1e-14)


def test_laguerre_recurrence_coefficients():
    # x p_n = p_{n+1} + (2n + 1) p_n + n^2 p_{n-1} for nu = 0.
    system = sv_system(ginibre_spec(2, 6, (0,)))
    res = check_recurrence(system, (2, 3))
    assert res["max_poly_residual"] <= 1e-9
    assert res["max_psi_residual"] <= 1e-9
    for n in (2, 3):
        a = res["coefficients"][("a", n)]
        assert a[0] == pytest.approx(2 * n + 1, rel=1e-8)
        assert a[1] == pytest.approx(n * n, rel=1e-8)


def test_gram_identity_all_families():
    systems = [
        sv_system(ginibre_spec(2, 5, (0, 1))),
        sv_system(inverse_mixed_spec(2, 6, (0,), (2,))),
        sv_system(truncated_spec(2, 4, (0, 1), (4, 7))),
    ]
    for system in systems:
        g = gram_matrix(system, 3)
        assert np.max(np.abs(g - np.eye(4))) <= 1e-12


def test_multiple_orthogonality_residuals():
    system = sv_system(ginibre_spec(2, 4, (0, 2)))
    res = check_multiple_orthogonality(system, 5)
    assert res["max_residual"] <= 1e-13


def test_kernel_sum_matches_contour():
    system = sv_system(ginibre_spec(2, 4, (0, 1)))
    for x, y in ((0.5, 0.5), (1.0, 3.0), (4.0, 0.2)):
        a = kernel_sum(system, x, y)
        b = kernel_contour(system, x, y)
        assert float(a) == pytest.approx(b, rel=1e-8)


def test_density_mass_and_positivity():
    system = sv_system(ginibre_spec(2, 3, (0, 1)))
    from prodrmt.exact_sv import _quad_nodes

    nodes, weights = _quad_nodes(system)
    dens = sv_density(system, nodes)
    assert np.all(dens > -1e-12)
    assert float((weights * dens).sum()) == pytest.approx(3.0, abs=1e-8)


def test_correlations_repulsion():
    system = sv_system(ginibre_spec(2, 4, (0,)))
    assert correlations(system, np.array([1.0, 1.0])) == pytest.approx(0.0, abs=1e-10)
    r1 = sv_density(system, np.array([1.0, 6.0]))
    r2 = correlations(system, np.array([1.0, 6.0]))
    assert 0 < r2 < float(r1[0] * r1[1])


def test_psi_mellin_zeros():
    system = sv_system(ginibre_spec(2, 3, (0,)))
    assert psi_log_mellin(system, 2, 1) is None
    assert psi_log_mellin(system, 2, 2) is None
    assert psi_log_mellin(system, 2, 3) is not None


def test_family_classification_guards():
    with pytest.raises(UnsupportedParamsError):
        sv_system(ginibre_spec(4, 3, (0,)))
    with pytest.raises(DomainError):
        sv_system(truncated_spec(2, 4, (0,), (3,)))
    mixed_trunc = ProductSpec(2, 3, (
        FactorSpec("ginibre"), FactorSpec("truncated_unitary", 0, 4)))
    with pytest.raises(UnsupportedParamsError):
        sv_system(mixed_trunc)
    with pytest.raises(UnsupportedParamsError):
        check_recurrence(sv_system(inverse_mixed_spec(2, 6, (0,), (2,))), (2,))


def test_truncated_weight_support():
    system = sv_system(truncated_spec(2, 3, (0,), (4,)))
    assert weight_values(system, 0, np.array([1.4]))[0] == 0.0
    assert weight_values(system, 0, np.array([0.5]))[0] > 0.0


def test_mean_trace_against_sampling():
    spec = ginibre_spec(2, 3, (0, 1))
    system = sv_system(spec)
    from prodrmt.exact_sv import _quad_nodes

    nodes, weights = _quad_nodes(system)
    exact = float((weights * nodes * sv_density(system, nodes)).sum())
    draws = squared_singular_value_batch(spec, 3000, make_rng(51))
    tr = draws.sum(axis=1)
    z = (tr.mean() - exact) / (tr.std(ddof=1) / math.sqrt(len(tr)))
    assert abs(z) < 4.0

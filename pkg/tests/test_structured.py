"""Structured linear algebra: Pfaffian, permanent, scaled determinants."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodrmt.structured import SizeError, logdet_scaled, permanent, pfaffian


def test_pfaffian_canonical_block():
    assert pfaffian(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(1.0)


def test_pfaffian_squares_to_determinant():
    rng = np.random.default_rng(5)
    for n in (2, 4, 6, 8):
        a = rng.standard_normal((n, n))
        skew = a - a.T
        assert pfaffian(skew) ** 2 == pytest.approx(np.linalg.det(skew),
                                                    rel=1e-9)


def test_pfaffian_odd_dimension_rejected():
    from prodrmt.specfun import DomainError

    rng = np.random.default_rng(6)
    a = rng.standard_normal((5, 5))
    with pytest.raises(DomainError):
        pfaffian(a - a.T)


@settings(deadline=None, max_examples=20)
@given(st.integers(1, 3))
def test_pfaffian_congruence_covariance(half):
    # Pf(B A B^T) = det(B) Pf(A).
    rng = np.random.default_rng(half)
    n = 2 * half
    a = rng.standard_normal((n, n))
    skew = a - a.T
    b = rng.standard_normal((n, n))
    lhs = pfaffian(b @ skew @ b.T)
    rhs = np.linalg.det(b) * pfaffian(skew)
    assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-10)


def test_pfaffian_complex_entries():
    rng = np.random.default_rng(7)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    skew = a - a.T
    assert pfaffian(skew) ** 2 == pytest.approx(np.linalg.det(skew), rel=1e-9)


def _brute_permanent(mat):
    n = mat.shape[0]
    total = 0.0
    for perm in itertools.permutations(range(n)):
        term = 1.0
        for i, j in enumerate(perm):
            term *= mat[i, j]
        total += term
    return total


def test_permanent_small_matrices():
    rng = np.random.default_rng(8)
    for n in (1, 2, 3, 4, 5):
        mat = rng.standard_normal((n, n))
        assert permanent(mat) == pytest.approx(_brute_permanent(mat), rel=1e-10)


def test_permanent_of_ones_is_factorial():
    for n in (2, 4, 6):
        assert permanent(np.ones((n, n))) == pytest.approx(math.factorial(n))


def test_permanent_size_guard():
    with pytest.raises(SizeError):
        permanent(np.ones((15, 15)))


def test_logdet_scaled():
    rng = np.random.default_rng(9)
    mat = rng.standard_normal((6, 6))
    logmag, phase = logdet_scaled(mat)
    assert phase * math.exp(logmag) == pytest.approx(np.linalg.det(mat),
                                                     rel=1e-10)

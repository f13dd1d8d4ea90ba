"""Special-function layer: scalar wrappers, pFq series, Meijer G."""

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prodrmt.specfun import (
    ContourError,
    DomainError,
    MeijerParams,
    UnsupportedParamsError,
    bessel_j,
    digamma,
    erfc_complex,
    ln_gamma,
    meijer_g,
    meijer_g_many,
    meijer_g_slater,
    pfq,
    trigamma,
)


def test_scalar_wrappers_match_mpmath():
    for x in (0.3, 1.0, 2.5, 7.0, 40.0):
        assert ln_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13)
        assert digamma(x) == pytest.approx(float(mpmath.digamma(x)), rel=1e-12)
        assert trigamma(x) == pytest.approx(float(mpmath.polygamma(1, x)), rel=1e-12)


def test_erfc_complex_matches_mpmath():
    for z in (0.5 + 0.0j, 1.0 + 2.0j, -0.7 + 0.3j, 2.0 - 1.5j):
        got = complex(erfc_complex(z))
        ref = complex(mpmath.erfc(z))
        assert abs(got - ref) <= 1e-13 * max(1.0, abs(ref))


def test_pfq_matches_mpmath():
    cases = [
        ((), (1.0,), 2.3),
        ((1.0,), (2.0, 3.0), -4.0),
        ((0.5, 1.5), (2.5,), 0.7),
        ((1.0, 2.0, 3.0), (4.0, 5.0, 6.0), 1.9),
    ]
    for upper, lower, z in cases:
        got = pfq(upper, lower, z)
        ref = complex(mpmath.hyper(list(upper), list(lower), z))
        assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))


@settings(deadline=None, max_examples=25)
@given(st.floats(0.1, 3.0), st.floats(1.0, 4.0))
def test_pfq_at_zero_is_one(a, b):
    assert pfq((a,), (b,), 0.0) == 1.0


def test_pfq_negative_integer_upper_truncates():
    # (-2)_k vanishes for k >= 3, so the series is a quadratic.
    val = pfq((-2.0,), (1.0,), 3.0)
    exact = 1.0 - 2.0 * 3.0 + (2.0 / 2.0) * 9.0 / 2.0
    assert val == pytest.approx(exact, rel=1e-14)


def _mp_ref(params, x):
    a = [list(params.a[: params.n]), list(params.a[params.n:])]
    b = [list(params.b[: params.m]), list(params.b[params.m:])]
    return float(mpmath.meijerg(a, b, x))


GINIBRE_WEIGHT = MeijerParams(m=2, n=0, a=(), b=(0.0, 1.0))
MIXED_WEIGHT = MeijerParams(m=2, n=0, a=(), b=(0.0, -4.0))
TAIL_STYLE = MeijerParams(m=3, n=0, a=(1.0,), b=(0.0, 2.0, 3.0))


@pytest.mark.parametrize("params", [GINIBRE_WEIGHT, TAIL_STYLE])
@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 4.0, 30.0, 120.0])
def test_meijer_g_matches_mpmath(params, x):
    got = meijer_g(params, x)
    ref = _mp_ref(params, x)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-280)


def test_meijer_g_relative_accuracy_when_tiny():
    # G^{2,0}_{0,2}(-; 0, 0 | x) = 2 K_0(2 sqrt(x)): decays like e^{-2 sqrt x}.
    params = MeijerParams(m=2, n=0, a=(), b=(0.0, 0.0))
    for x in (100.0, 2500.0, 10000.0):
        got = meijer_g(params, x)
        ref = float(2.0 * mpmath.besselk(0, 2.0 * math.sqrt(x)))
        assert got == pytest.approx(ref, rel=1e-9)


def test_meijer_g_many_vectorizes():
    xs = np.geomspace(0.01, 50.0, 40)
    vals = meijer_g_many(GINIBRE_WEIGHT, xs)
    refs = np.array([_mp_ref(GINIBRE_WEIGHT, float(x)) for x in xs])
    assert np.max(np.abs(vals / refs - 1.0)) <= 1e-9


def test_meijer_g_slater_cross_check():
    params = MeijerParams(m=2, n=0, a=(), b=(0.0, 0.5))
    for x in (0.2, 1.0, 3.0):
        assert meijer_g_slater(params, x) == pytest.approx(
            meijer_g(params, x), rel=1e-9)


def test_balanced_class_supported_on_unit_interval():
    # G^{1,0}_{1,1}(kappa; nu | x) ~ truncated-unitary weight.
    params = MeijerParams(m=1, n=0, a=(2.0,), b=(0.0,))
    inside = meijer_g(params, 0.5)
    assert inside == pytest.approx((1.0 - 0.5) / math.gamma(2.0), rel=1e-10)
    assert meijer_g(params, 1.5) == 0.0


def test_narrow_strip_contour():
    # Pole groups only 1/2 apart; used by the all-real determinant.
    params = MeijerParams(m=3, n=2, a=(0.5, 0.5, 1.0), b=(0.0, 1.0, 1.0))
    got = meijer_g(params, 1.0)
    # Entry value for the N=2, M=2 all-real probability: pi/4 times the
    # Gamma normalization prod Gamma(n/2) = Gamma(1/2)^2 Gamma(1)^2.
    assert got == pytest.approx(math.pi / 4.0 * math.pi, rel=1e-8)


def test_domain_and_param_errors():
    with pytest.raises(DomainError):
        meijer_g(GINIBRE_WEIGHT, -1.0)
    with pytest.raises(UnsupportedParamsError):
        meijer_g("not params", 1.0)
    with pytest.raises(UnsupportedParamsError):
        meijer_g_slater(MeijerParams(m=1, n=0, a=(1.0,), b=(0.0,)), 0.3)


def test_contour_abscissa_window_pinch():
    from prodrmt.specfun import _abscissa_window

    with pytest.raises(ContourError):
        # b_1 = 1 above a_1 - 1 = 1: genuinely no strip.
        _abscissa_window(MeijerParams(m=1, n=1, a=(2.0,), b=(1.0,)))


def test_bessel_wrapper():
    assert bessel_j(0.0, 0.0) == 1.0
    assert bessel_j(1.0, 2.0) == pytest.approx(float(mpmath.besselj(1, 2.0)),
                                               rel=1e-12)

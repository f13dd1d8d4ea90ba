r"""Special functions for product-matrix spectral statistics.

Everything the exact formulas need: log-gamma, digamma/trigamma,
generalized hypergeometric series, Meijer G-functions of the
integer-parameter classes that appear as weights and kernels, Bessel J,
Airy, and the complementary error function of complex argument.

The Meijer G convention is

    G^{m,n}_{p,q}(a; b | z)
      = (1/2 pi i) int_C dz z^s prod_{j<=m} Gamma(b_j - s)
        prod_{j<=n} Gamma(1 - a_j + s)
        / [prod_{j>m} Gamma(1 - b_j + s) prod_{j>n} Gamma(a_j - s)],

with C a vertical line separating the poles of Gamma(b_j - s) (to the
right) from those of Gamma(1 - a_j + s) (to the left).  Two evaluation
routes are provided: a vectorized trapezoidal Mellin-Barnes quadrature
along that line (used whenever the integrand decays exponentially), and
mpmath's evaluator for the balanced p = q classes where the line
integrand only decays algebraically.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
import scipy.optimize
from scipy import special as sp


class DomainError(ValueError):
    """Argument outside the supported domain."""


class ConvergenceError(ArithmeticError):
    """A series failed to converge for the requested parameters."""


class UnsupportedParamsError(ValueError):
    """Parameter class outside the finitely many supported shapes."""


class ContourError(ArithmeticError):
    """No pole-separating vertical contour exists (pinched strip)."""


class PrecisionError(ArithmeticError):
    """Quadrature stopped short of the requested tolerance."""

    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class RangeError(OverflowError):
    """Result overflows double precision."""


def ln_gamma(x):
    """Return log Gamma(x) for x > 0.

    Parameters
    ----------
    x : float or array_like
        Strictly positive argument.

    Returns
    -------
    float or ndarray
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("ln_gamma requires x > 0")
    out = sp.gammaln(x)
    return float(out) if out.ndim == 0 else out


def digamma(x):
    """Return psi(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("digamma requires x > 0")
    out = sp.psi(x)
    return float(out) if out.ndim == 0 else out


def trigamma(x):
    """Return psi'(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("trigamma requires x > 0")
    out = sp.polygamma(1, x)
    return float(out) if out.ndim == 0 else out


def bessel_j(nu, x):
    """Bessel function of the first kind J_nu(x)."""
    out = sp.jv(nu, x)
    if np.any(~np.isfinite(np.asarray(out, dtype=float))):
        raise RangeError("bessel_j overflow")
    return out


def bessel_j_prime(nu, x):
    """Derivative J_nu'(x)."""
    return sp.jvp(nu, x)


def airy_ai(x):
    """Airy function Ai(x)."""
    return sp.airy(x)[0]


def airy_ai_prime(x):
    """Airy function derivative Ai'(x)."""
    return sp.airy(x)[1]


def erfc_complex(z):
    """Complementary error function of complex argument.

    Uses erfc(z) = exp(-z^2) w(iz) with the Faddeeva function w.
    """
    z = np.asarray(z, dtype=complex)
    out = np.exp(-z * z) * sp.wofz(1j * z)
    return complex(out) if out.ndim == 0 else out


def pfq(upper, lower, z, tol=1e-14, max_terms=100000):
    """Generalized hypergeometric series pFq(upper; lower; z).

    Parameters
    ----------
    upper, lower : sequence of float
        Numerator and denominator parameters.  A non-positive integer
        upper parameter terminates the series; non-positive integer
        lower parameters are rejected.
    z : complex
    tol : float
        Stopping rule: |term| < tol * |partial sum| for 3 consecutive
        terms.  Summation is compensated (Kahan).

    Returns
    -------
    complex
    """
    upper = [float(a) for a in upper]
    lower = [float(b) for b in lower]
    for b in lower:
        if b <= 0 and float(b).is_integer():
            raise DomainError("lower parameter is a non-positive integer")

    n_terms = None
    for a in upper:
        if a <= 0 and float(a).is_integer():
            k = int(-a) + 1
            n_terms = k if n_terms is None else min(n_terms, k)

    if n_terms is None:
        if len(upper) == len(lower) + 1 and abs(z) >= 1:
            raise ConvergenceError("p = q + 1 series requires |z| < 1")
        if len(upper) > len(lower) + 1:
            raise ConvergenceError("divergent series: p > q + 1")

    total = complex(0.0)
    comp = complex(0.0)
    term = complex(1.0)
    small_streak = 0
    k = 0
    while True:
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if n_terms is not None and k + 1 >= n_terms:
            break
        num = 1.0
        for a in upper:
            num *= a + k
        den = 1.0
        for b in lower:
            den *= b + k
        term = term * num / den * z / (k + 1)
        k += 1
        if n_terms is None:
            if abs(term) < tol * max(abs(total), 1e-300):
                small_streak += 1
                if small_streak >= 3:
                    break
            else:
                small_streak = 0
            if k >= max_terms:
                raise ConvergenceError("pfq did not converge in %d terms" % max_terms)
    return total


@dataclass(frozen=True)
class MeijerParams:
    """Index counts and parameter lists of a Meijer G-function.

    Attributes
    ----------
    m, n : int
        Numbers of Gamma(b_j - s) and Gamma(1 - a_j + s) factors.
    a : tuple of float
        Upper parameters, length p; first `n` belong to the numerator.
    b : tuple of float
        Lower parameters, length q; first `m` belong to the numerator.
    """

    m: int
    n: int
    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise UnsupportedParamsError("require 0 <= m <= q and 0 <= n <= p")
        if self.p > self.q:
            raise UnsupportedParamsError(
                "p > q lies outside the supported classes (p <= q throughout)")

    @property
    def p(self):
        return len(self.a)

    @property
    def q(self):
        return len(self.b)

    @property
    def decay_rate(self):
        """Exponential decay rate pi*(m + n - (p+q)/2) of the line integrand."""
        return np.pi * (self.m + self.n - 0.5 * (self.p + self.q))

    def contour_abscissa(self):
        """Midpoint of the pole-free strip max(a_n-group) - 1 < c < min(b_m-group)."""
        lo = max(self.a[: self.n]) - 1.0 if self.n else None
        hi = min(self.b[: self.m]) if self.m else None
        if lo is not None and hi is not None:
            if lo >= hi:
                raise ContourError(
                    "contour pinch: no strip between poles (a_i - b_j a positive integer)")
            return 0.5 * (lo + hi)
        if hi is not None:
            return hi - 0.5
        if lo is not None:
            return lo + 0.5
        return 0.0


def _abscissa_window(params):
    """Allowed range of the line abscissa c keeping all poles on one side.

    The upper limit keeps the poles of Gamma(b_j - s) to the right; the
    lower limit keeps the poles of Gamma(1 - a_j + s) and the real-axis
    singularities of the denominator factors Gamma(1 - b_j + s) to the
    left.  Without such factors the window extends to -inf.
    """
    hi = min(params.b[: params.m]) if params.m else np.inf
    lo = -np.inf
    if params.n:
        lo = max(params.a[: params.n]) - 1.0
    if params.q > params.m:
        lo = max(lo, max(params.b[params.m:]) - 1.0)
    if lo >= hi:
        raise ContourError(
            "contour pinch: no strip between poles (a_i - b_j a positive integer)")
    # Keep a margin from both pole groups, shrinking it when the strip
    # itself is narrow.
    margin = min(0.25, 0.25 * (hi - lo)) if np.isfinite(lo) else 0.25
    return lo + margin if np.isfinite(lo) else lo, hi - margin


def _log_envelope(params, c, logx):
    """log of the line integrand magnitude at s = c (t = 0)."""
    total = c * logx
    for bj in params.b[: params.m]:
        total += sp.gammaln(bj - c)
    for aj in params.a[: params.n]:
        total += sp.gammaln(1.0 - aj + c)
    for bj in params.b[params.m:]:
        total -= sp.gammaln(1.0 - bj + c)
    for aj in params.a[params.n:]:
        total -= sp.gammaln(aj - c)
    return total


def _saddle_abscissa(params, logx):
    """Abscissa near the real-axis saddle of the line integrand.

    Minimizing the t = 0 envelope keeps the quadrature scale comparable
    to the function value, so the relative accuracy stays uniform even
    where the function is exponentially small (large arguments).
    """
    lo, hi = _abscissa_window(params)
    if not np.isfinite(hi):
        hi = 20.0
    if not np.isfinite(lo):
        # Exponential-decay tail: the saddle sits near -x^{1/(q-p)} per
        # remaining Gamma factor; bracket generously.
        gap = max(params.q - params.p, 1)
        lo = hi - 10.0 - 3.0 * gap * math.exp(max(logx, 0.0) / gap)
    res = scipy.optimize.minimize_scalar(
        lambda c: _log_envelope(params, c, logx),
        bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-3 * (hi - lo) + 1e-9})
    return float(res.x)


def _contour_values(params, xs, tol):
    """Trapezoidal Mellin-Barnes quadrature, vectorized over arguments.

    The line integrand is analytic in a strip around the contour and
    decays like exp(-decay_rate * |t|); the trapezoid rule is then
    spectrally accurate and the step is halved until the values settle.
    Arguments are grouped into logarithmic buckets sharing a common
    saddle-adapted abscissa.
    """
    xs = np.asarray(xs, dtype=float)
    if params.decay_rate <= 0:
        raise UnsupportedParamsError("contour quadrature requires m + n > (p+q)/2")
    logx = np.log(xs)
    values = np.empty(xs.shape)
    converged = np.zeros(xs.shape, dtype=bool)
    # Bucket arguments so each bucket shares one abscissa.
    spread = logx.max() - logx.min() if xs.size > 1 else 0.0
    n_buckets = 1 if spread < 0.5 else min(16, int(spread / 0.5) + 1)
    bucket = np.minimum(
        ((logx - logx.min()) / (spread + 1e-300) * n_buckets).astype(int),
        n_buckets - 1)
    for idx in range(n_buckets):
        mask = bucket == idx
        if not mask.any():
            continue
        c = _saddle_abscissa(params, float(np.median(logx[mask])))
        values[mask], converged[mask] = _contour_fixed_c(params, logx[mask], tol, c)
    return values, converged


def _contour_fixed_c(params, logx, tol, c):
    a = np.asarray(params.a)
    b = np.asarray(params.b)
    m, n = params.m, params.n

    def integrand(t):
        # t >= 0 only; conjugate symmetry supplies the negative half-line.
        s = c + 1j * t
        lg = np.zeros_like(s)
        if m:
            lg = lg + sp.loggamma(b[:m, None] - s[None, :]).sum(axis=0)
        if n:
            lg = lg + sp.loggamma(1.0 - a[:n, None] + s[None, :]).sum(axis=0)
        if params.q > m:
            lg = lg - sp.loggamma(1.0 - b[m:, None] + s[None, :]).sum(axis=0)
        if params.p > n:
            lg = lg - sp.loggamma(a[n:, None] - s[None, :]).sum(axis=0)
        # shape (len(t), len(logx)); scaled by the envelope at t = 0 so
        # the working numbers stay O(1).
        return np.exp(lg[:, None] + s[:, None] * logx[None, :]
                      - peak_log[None, :])

    peak_log = np.array([_log_envelope(params, c, lx) for lx in logx])
    # Truncation point: scaled integrand below the tolerance target.
    alpha = params.decay_rate
    t_max = max(8.0, (-np.log(1e-3 * tol) + 10.0 + 3.0 * abs(c)) / alpha)
    for _ in range(40):
        if np.abs(integrand(np.array([t_max]))).max() < 1e-3 * tol:
            break
        t_max *= 1.4

    h = 0.5
    prev = None
    converged = np.zeros(logx.shape, dtype=bool)
    integral = np.zeros(logx.shape)
    for _ in range(9):
        t = np.arange(0.0, t_max + h, h)
        vals = integrand(t)
        integral = h * (vals[0].real + 2.0 * vals[1:].real.sum(axis=0)) / (2.0 * np.pi)
        if prev is not None:
            err = np.abs(integral - prev)
            # The saddle abscissa makes |integral| O(1) in scaled units;
            # the additive floor only matters at genuine zeros.
            scale = np.maximum(np.abs(integral), 1e-8)
            converged = err <= tol * scale
            if np.all(converged):
                break
        prev = integral
        h *= 0.5
    with np.errstate(over="ignore"):
        return integral * np.exp(peak_log), converged


@lru_cache(maxsize=4096)
def _mpmath_value(m, n, a, b, x):
    a_s = [list(a[:n]), list(a[n:])]
    b_s = [list(b[:m]), list(b[m:])]
    try:
        val = mpmath.meijerg(a_s, b_s, x)
    except ValueError:
        # Values indistinguishable from zero make the series acceleration
        # fail; bounding the magnitude resolves them.
        val = mpmath.meijerg(a_s, b_s, x, zeroprec=600)
    return float(mpmath.re(val))


def meijer_g(params, x, tol=1e-11):
    """Evaluate a Meijer G-function at real x > 0.

    Dispatches between the vectorized Mellin-Barnes line quadrature
    (whenever the line integrand decays exponentially, including the
    balanced classes with m + n > p) and mpmath for the remaining
    balanced p = q classes, whose support is (0, 1) when n = 0.
    """
    if not isinstance(params, MeijerParams):
        raise UnsupportedParamsError("params must be a MeijerParams")
    return float(meijer_g_many(params, np.array([float(x)]), tol=tol)[0])


def meijer_g_many(params, xs, tol=1e-11):
    """Vectorized `meijer_g` over an array of positive arguments."""
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise DomainError("meijer_g requires x > 0")
    if params.decay_rate > 0:
        try:
            vals, converged = _contour_values(params, xs, tol)
        except ContourError:
            # Pole groups touch (a_i - b_j a positive integer): no line
            # contour exists, but the function itself is regular.
            vals = np.empty_like(xs)
            converged = np.zeros(xs.shape, dtype=bool)
        if not np.all(converged):
            # The line quadrature loses relative accuracy when the value
            # is exponentially small (large argument); re-do those points
            # with the arbitrary-precision backend.
            for i in np.flatnonzero(~converged):
                vals[i] = _mpmath_value(params.m, params.n, params.a, params.b,
                                        float(xs[i]))
        return vals
    out = np.empty_like(xs)
    for i, x in enumerate(xs):
        if params.n == 0 and params.p == params.q and x >= 1.0:
            # G^{q,0}_{q,q} is supported on (0, 1).
            out[i] = 0.0
        else:
            out[i] = _mpmath_value(params.m, params.n, params.a, params.b, float(x))
    return out


def meijer_g_slater(params, x):
    """Slater residue-series evaluation of a p < q Meijer G-function.

    Valid when all b_1..b_m differ by non-integers (simple poles only).
    Used as an independent cross-check of the contour quadrature.
    """
    a, b = params.a, params.b
    m, n, p, q = params.m, params.n, params.p, params.q
    if p >= q:
        raise UnsupportedParamsError("Slater series requires p < q")
    total = 0.0
    for k in range(m):
        pref = 1.0
        for j in range(m):
            if j != k:
                pref *= sp.gamma(b[j] - b[k])
        for j in range(n):
            pref *= sp.gamma(1.0 + b[k] - a[j])
        for j in range(m, q):
            pref /= sp.gamma(1.0 - b[j] + b[k])
        for j in range(n, p):
            pref /= sp.gamma(a[j] - b[k])
        upper = [1.0 + b[k] - a[j] for j in range(p)]
        lower = [1.0 + b[k] - b[j] for j in range(q) if j != k]
        z = x * (-1.0) ** (p - m - n)
        total += pref * x ** b[k] * complex(pfq(upper, lower, z)).real
    return total

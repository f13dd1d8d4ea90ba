r"""Exact finite-N eigenvalue statistics of matrix products.

For a rotation-invariant weight w(|z|) the beta = 2 eigenvalues form a
determinantal point process with monomial orthogonal polynomials, and
the beta = 4 eigenvalues (upper half plane representatives) form a
Pfaffian point process built from skew-orthogonal polynomials whose
coefficients are ratios of the rotational moments s_k.  For products of
Ginibre, inverse Ginibre, truncated unitary, and inverse truncated
unitary factors the weight is a Meijer G-function of x = c |z|^2 and
all moments are products of Gamma functions.

The radii |z_1|, ..., |z_N| are independent; their individual tail
probabilities follow from the incomplete Mellin transform of the
weight, which is again a Meijer G-function with shifted parameters.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.special as sp

from .specfun import DomainError, MeijerParams, UnsupportedParamsError, meijer_g, meijer_g_many
from .structured import pfaffian
from .ensembles import (
    GINIBRE,
    INVERSE_GINIBRE,
    INVERSE_TRUNCATED_UNITARY,
    TRUNCATED_UNITARY,
    ProductSpec,
)

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)


def _sorted_sum(terms):
    # Summing in sorted order makes the result independent of the factor
    # ordering down to the last bit.
    return math.fsum(sorted(terms))


def log_moments(spec):
    """Logarithms of the rotational weight moments.

    For beta = 2 these are the squared norms h_n = int w(|z|) |z|^{2n} d^2z
    for n = 0..N-1; for beta = 4 they are the half-plane moments s_k for
    k = 0..2N-1, from which h_n = 2 s_{2n+1}.

    Returns
    -------
    ndarray of float
    """
    n_base = spec.n
    count = 2 * n_base if spec.beta == 4 else n_base
    out = np.empty(count)
    for k in range(count):
        if spec.beta == 2:
            terms = [LOG_PI]
            for f in spec.factors:
                if f.kind == GINIBRE:
                    terms.append(sp.gammaln(f.offset + k + 1))
                elif f.kind == TRUNCATED_UNITARY:
                    terms.append(sp.gammaln(f.offset + k + 1))
                    terms.append(-sp.gammaln(f.truncation + k + 1))
                elif f.kind == INVERSE_GINIBRE:
                    terms.append(sp.gammaln(n_base + f.offset - k))
                else:
                    terms.append(sp.gammaln(n_base + f.offset - k))
                    terms.append(-sp.gammaln(n_base + f.truncation - k))
        else:
            terms = [LOG_PI - LOG_2]
            for f in spec.factors:
                if f.kind == GINIBRE:
                    terms.append(sp.gammaln(2 * f.offset + k + 1))
                    terms.append(-(k + 1) * LOG_2)
                elif f.kind == TRUNCATED_UNITARY:
                    terms.append(sp.gammaln(2 * f.offset + k + 1))
                    terms.append(-sp.gammaln(2 * f.truncation + k))
                elif f.kind == INVERSE_GINIBRE:
                    terms.append(sp.gammaln(2 * n_base + 2 * f.offset - k))
                    terms.append((k + 1) * LOG_2)
                else:
                    terms.append(sp.gammaln(2 * n_base + 2 * f.offset - k))
                    terms.append(-sp.gammaln(2 * n_base + 2 * f.truncation - k - 1))
        out[k] = _sorted_sum(terms)
    return out


def weight_meijer(spec):
    """Meijer G parameters and argument scale of the eigenvalue weight.

    The weight is w(z) = G(params | scale * |z|^2).  For beta = 4 the
    parameters are the doubled beta = 2 parameters and the scale picks
    up a power of two per Gaussian factor.
    """
    if spec.beta == 1:
        half = 0.5
        dbl_off = 0
    elif spec.beta == 2:
        half = 1.0
        dbl_off = 0
    else:
        half = 2.0
        dbl_off = spec.n
    a_num, a_den, b_num, b_den = [], [], [], []
    log2_scale = 0
    for f in spec.factors:
        if f.kind == GINIBRE:
            b_num.append(half * f.offset)
            log2_scale += 1
        elif f.kind == TRUNCATED_UNITARY:
            b_num.append(half * f.offset)
            a_den.append(half * f.truncation - (half - 1.0))
        elif f.kind == INVERSE_GINIBRE:
            a_num.append(-spec.n - half * f.offset - dbl_off)
            log2_scale -= 1
        else:
            a_num.append(-spec.n - half * f.offset - dbl_off)
            b_den.append(-spec.n - half * f.truncation - dbl_off + (half - 1.0))
    params = MeijerParams(
        m=len(b_num), n=len(a_num),
        a=tuple(a_num) + tuple(a_den), b=tuple(b_num) + tuple(b_den))
    return params, float(half) ** log2_scale


@dataclass
class EigenModel:
    """Weight data for exact eigenvalue correlations of one ProductSpec."""

    spec: ProductSpec
    params: MeijerParams
    scale: float
    log_moments: np.ndarray

    @property
    def beta(self):
        return self.spec.beta

    @property
    def n(self):
        return self.spec.n

    def log_h(self, k):
        """log of the squared norm h_k."""
        if self.beta == 4:
            return LOG_2 + self.log_moments[2 * k + 1]
        return self.log_moments[k]


def eigen_model(spec):
    if spec.beta not in (2, 4):
        raise UnsupportedParamsError("eigenvalue correlations require beta = 2 or 4")
    params, scale = weight_meijer(spec)
    return EigenModel(spec, params, scale, log_moments(spec))


def weight_values(model, r, tol=1e-11):
    """Weight w(|z|) at radii r (vectorized)."""
    r = np.asarray(r, dtype=float)
    return meijer_g_many(model.params, model.scale * r.ravel() ** 2, tol=tol).reshape(r.shape)


def _kernel_beta2(model, z, u):
    """K_N(z, u) = sum_n (z u*)^n / h_n for scalars or arrays."""
    zu = np.asarray(z) * np.conj(np.asarray(u))
    total = np.zeros_like(zu, dtype=complex)
    for k in range(model.n):
        total = total + zu ** k * np.exp(-model.log_h(k))
    return total


def _skew_poly_even_coeffs(model):
    """Coefficients of p_{2n}(z) = sum_k c[n, k] z^{2k}, 0 <= k <= n."""
    s_log = model.log_moments
    n = model.n
    c = np.zeros((n, n + 1))
    for nn in range(n):
        log_ratio = 0.0
        c[nn, nn] = 1.0
        for k in range(nn - 1, -1, -1):
            log_ratio += s_log[2 * (k + 1)] - s_log[2 * (k + 1) - 1]
            c[nn, k] = np.exp(log_ratio)
    return c


def _kernel_beta4(model, z, u):
    """Skew-orthogonal polynomial kernel sum for beta = 4."""
    z = np.asarray(z, dtype=complex)
    u = np.asarray(u, dtype=complex)
    coeffs = _skew_poly_even_coeffs(model)
    total = np.zeros(np.broadcast(z, u).shape, dtype=complex)
    for nn in range(model.n):
        p_even_z = sum(coeffs[nn, k] * z ** (2 * k) for k in range(nn + 1))
        p_even_u = sum(coeffs[nn, k] * u ** (2 * k) for k in range(nn + 1))
        p_odd_z = z ** (2 * nn + 1)
        p_odd_u = u ** (2 * nn + 1)
        total = total + (p_odd_z * p_even_u - p_odd_u * p_even_z) * np.exp(-model.log_h(nn))
    return total


def density(model, zs, tol=1e-11):
    """One-point correlation R_1(z) (vectorized over complex zs).

    For beta = 4 the argument must lie in the closed upper half plane;
    the density vanishes on the real axis.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex))
    w = weight_values(model, np.abs(zs), tol=tol)
    if model.beta == 2:
        k = _kernel_beta2(model, zs, zs).real
        return w * k
    vals = (np.conj(zs) - zs) * _kernel_beta4(model, zs, np.conj(zs))
    return w * vals.real


def correlations(model, zs, tol=1e-11):
    """k-point correlation function R_k at a tuple of complex points."""
    zs = np.asarray(zs, dtype=complex)
    k = len(zs)
    w = weight_values(model, np.abs(zs), tol=tol)
    if model.beta == 2:
        mat = _kernel_beta2(model, zs[:, None], zs[None, :])
        return float(np.prod(w) * np.linalg.det(mat).real)
    pts = np.empty(2 * k, dtype=complex)
    pts[0::2] = zs
    pts[1::2] = np.conj(zs)
    block = _kernel_beta4(model, pts[:, None], pts[None, :])
    pref = np.prod(w * (np.conj(zs) - zs))
    return float((pref * pfaffian(block)).real)


def _tail_params(params, s):
    """Parameters of int_y^inf x^{s-1} G(params | x) dx as a Meijer G of y."""
    a = tuple(ai + s for ai in params.a) + (1.0,)
    b = (0.0,) + tuple(bi + s for bi in params.b)
    return MeijerParams(m=params.m + 1, n=params.n, a=a, b=b)


def radial_tail(model, k, r, tol=1e-11):
    """P(|z_k| > r) for the k-th independent radius, k = 1..N (vectorized in r)."""
    if not 1 <= k <= model.n:
        raise DomainError("radius index k must satisfy 1 <= k <= N")
    r = np.asarray(r, dtype=float)
    s = 2 * k if model.beta == 4 else k
    tp = _tail_params(model.params, s)
    y = model.scale * r.ravel() ** 2
    vals = np.ones(y.shape)  # tail at r = 0 is exactly 1 by normalization
    finite = np.isfinite(y)
    vals[~finite] = 0.0
    pos = (y > 0) & finite
    if pos.any():
        g = meijer_g_many(tp, y[pos], tol=tol)
        log_pref = LOG_PI - s * math.log(model.scale) - model.log_moments[s - 1]
        if model.beta == 4:
            log_pref -= LOG_2
        vals[pos] = g * math.exp(log_pref)
    return np.clip(vals.reshape(r.shape), 0.0, 1.0)


def radial_cdf(model, k, r, tol=1e-11):
    """P(|z_k| <= r) for the k-th independent radius."""
    return 1.0 - radial_tail(model, k, r, tol=tol)


def radial_pdf(model, k, r, tol=1e-11):
    """Density of the k-th independent radius, k = 1..N (vectorized in r)."""
    if not 1 <= k <= model.n:
        raise DomainError("radius index k must satisfy 1 <= k <= N")
    r = np.asarray(r, dtype=float)
    w = weight_values(model, r, tol=tol)
    if model.beta == 4:
        log_pref = LOG_PI - model.log_moments[2 * k - 1]
        return np.exp(log_pref) * r ** (4 * k - 1) * w
    log_pref = LOG_PI + LOG_2 - model.log_moments[k - 1]
    return np.exp(log_pref) * r ** (2 * k - 1) * w


def radial_density(model, r, tol=1e-11):
    """Mean radial eigenvalue density: sum of the independent radius densities."""
    r = np.asarray(r, dtype=float)
    total = np.zeros(r.shape)
    for k in range(1, model.n + 1):
        total = total + radial_pdf(model, k, r, tol=tol)
    return total


def expected_bin_counts(model, edges, n_samples, tol=1e-11):
    """Expected eigenvalue counts per radial bin for n_samples draws.

    Exact: per-bin CDF differences of the independent radii, summed.
    """
    edges = np.asarray(edges, dtype=float)
    total = np.zeros(len(edges) - 1)
    for k in range(1, model.n + 1):
        cdf = radial_cdf(model, k, edges, tol=tol)
        total += np.diff(cdf)
    return n_samples * total


def hole_probability(model, r, method="closed", tol=1e-11):
    """P(no eigenvalue radius <= r), the hole probability of a centred disc.

    method = "closed" uses the shifted-parameter Meijer G tails of the
    independent radii; method = "quadrature" integrates the radial
    densities numerically as an independent check.
    """
    r = float(r)
    if r <= 0:
        return 1.0
    if method == "closed":
        return float(np.prod([radial_tail(model, k, np.array([r]), tol=tol)[0]
                              for k in range(1, model.n + 1)]))
    if method == "quadrature":
        total = 1.0
        for k in range(1, model.n + 1):
            mass, err = scipy.integrate.quad(
                lambda rr, kk=k: float(radial_pdf(model, kk, np.array([rr]))[0]),
                0.0, r, limit=200)
            total *= 1.0 - mass
        return total
    raise DomainError("method must be 'closed' or 'quadrature'")


def hole_probability_gamma(spec, r):
    """Hole probability for a single Ginibre factor via incomplete Gamma.

    Independent closed form valid for beta = 2, M = 1: each radius tail
    is a normalized upper incomplete Gamma function.
    """
    if spec.beta != 2 or len(spec.factors) != 1 or spec.factors[0].kind != GINIBRE:
        raise UnsupportedParamsError("gamma-function route requires a single "
                                     "beta = 2 Ginibre factor")
    nu = spec.factors[0].offset
    return float(np.prod([sp.gammaincc(n + nu, r * r) for n in range(1, spec.n + 1)]))


def prob_all_real(spec, tol=1e-10):
    """Probability that all eigenvalues of a real Gaussian product are real.

    Requires beta = 1, even N, and Gaussian factors only.
    """
    if spec.beta != 1:
        raise UnsupportedParamsError("all-real probability requires beta = 1")
    if spec.n % 2:
        raise UnsupportedParamsError("closed form requires even N")
    if any(f.kind != GINIBRE for f in spec.factors):
        raise UnsupportedParamsError("closed form covers Gaussian factors only")
    nus = [f.offset for f in spec.factors]
    m = len(nus)
    half = spec.n // 2
    mat = np.empty((half, half))
    for kk in range(1, half + 1):
        for ll in range(1, half + 1):
            a = tuple(1.5 - v / 2.0 - ll for v in nus) + (1.0,)
            b = (0.0,) + tuple(v / 2.0 + kk for v in nus)
            params = MeijerParams(m=m + 1, n=m, a=a, b=b)
            mat[kk - 1, ll - 1] = meijer_g(params, 1.0, tol=tol)
    log_den = sum(sp.gammaln(v / 2.0 + nn / 2.0)
                  for v in nus for nn in range(1, spec.n + 1))
    return float(np.linalg.det(mat) * np.exp(-log_den))

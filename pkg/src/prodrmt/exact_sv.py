r"""Exact finite-N squared-singular-value statistics of matrix products.

The squared singular values of products of Ginibre, inverse Ginibre,
and truncated unitary factors form polynomial ensembles: determinantal
point processes with a biorthogonal system of monic polynomials p_n and
functions psi_n spanning the Meijer G weight family.  All three
families share the structure

    p_n(x)   = (-1)^n (h_n/h_0) pFq(-n, uppers; nus + 1; sigma x),
    psi_n(x) = Meijer G with one parameter set per family,
    h_n      = n! prod Gamma(nu_m + n + 1) x (family factors),

and the kernel K_N(x, y) = sum_n p_n(x) psi_n(y) / h_n.  For the
Ginibre family the kernel also has a double-contour representation
whose residue sum is used as an independent evaluation route.
"""

import math
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.special as sp

from .specfun import DomainError, MeijerParams, UnsupportedParamsError, meijer_g_many
from .ensembles import GINIBRE, INVERSE_GINIBRE, TRUNCATED_UNITARY, ProductSpec

GINIBRE_FAMILY = "ginibre"
MIXED_FAMILY = "mixed"
TRUNCATED_FAMILY = "truncated"


@dataclass(frozen=True)
class SVSystem:
    """Biorthogonal system for one squared-singular-value ensemble."""

    family: str
    n_base: int
    nus: tuple
    mus: tuple = ()
    kappas: tuple = ()

    @property
    def n_direct(self):
        return len(self.nus)

    @property
    def n_inverse(self):
        return len(self.mus)


def sv_system(spec):
    """Classify a ProductSpec into one of the three solvable SV families."""
    if spec.beta != 2:
        raise UnsupportedParamsError("singular value statistics require beta = 2")
    kinds = {f.kind for f in spec.factors}
    if kinds == {GINIBRE}:
        return SVSystem(GINIBRE_FAMILY, spec.n,
                        tuple(f.offset for f in spec.factors))
    if kinds == {GINIBRE, INVERSE_GINIBRE}:
        return SVSystem(MIXED_FAMILY, spec.n,
                        tuple(f.offset for f in spec.factors if f.kind == GINIBRE),
                        mus=tuple(f.offset for f in spec.factors
                                  if f.kind == INVERSE_GINIBRE))
    if kinds == {TRUNCATED_UNITARY}:
        nus = tuple(f.offset for f in spec.factors)
        kappas = tuple(f.truncation for f in spec.factors)
        if kappas[-1] - nus[-1] < spec.n:
            raise DomainError(
                "truncated SV family requires kappa_M - nu_M >= N for a "
                "normalizable weight family")
        return SVSystem(TRUNCATED_FAMILY, spec.n, nus, kappas=kappas)
    raise UnsupportedParamsError(
        "solvable SV families: all Ginibre, Ginibre + inverse Ginibre, "
        "or all truncated unitary")


def log_h(system, n):
    """log of the squared norm h_n."""
    total = sp.gammaln(n + 1)
    for v in system.nus:
        total += sp.gammaln(v + n + 1)
    if system.family == MIXED_FAMILY:
        for u in system.mus:
            arg = system.n_base + u - n
            if arg <= 0:
                raise DomainError("norm h_n requires n < N + min(mu)")
            total += sp.gammaln(arg)
    elif system.family == TRUNCATED_FAMILY:
        for k in system.kappas:
            total -= sp.gammaln(k + n + 1)
    return total


def _poch_sign_log(a, j):
    """Pochhammer (a)_j as (sign, log magnitude); integer a only."""
    if j == 0:
        return 1.0, 0.0
    if a > 0:
        return 1.0, sp.gammaln(a + j) - sp.gammaln(a)
    m = int(round(-a))
    if abs(-a - m) > 1e-12:
        raise DomainError("only integer parameters supported")
    if j > m:
        return 0.0, -np.inf
    return (-1.0) ** j, sp.gammaln(m + 1) - sp.gammaln(m - j + 1)


def poly_coeff_sign_log(system, n):
    """Coefficients of the monic polynomial p_n as (signs, log magnitudes).

    p_n(x) = sum_j sign[j] exp(log[j]) x^j, derived from the
    terminating hypergeometric representation of each family.
    """
    if system.family == GINIBRE_FAMILY:
        uppers, sigma_sign = (), 1.0
    elif system.family == MIXED_FAMILY:
        uppers = tuple(1 - system.n_base - u for u in system.mus)
        sigma_sign = (-1.0) ** system.n_inverse
    else:
        uppers, sigma_sign = tuple(k + 1 for k in system.kappas), 1.0
    # Monic normalization: the hypergeometric prefactor is h_n/(n! h_0).
    log_pref = log_h(system, n) - log_h(system, 0) - sp.gammaln(n + 1)
    signs = np.empty(n + 1)
    logs = np.empty(n + 1)
    for j in range(n + 1):
        sign = (-1.0) ** n * sigma_sign ** j
        s, lg = _poch_sign_log(-n, j)
        sign *= s
        total = log_pref + lg - sp.gammaln(j + 1)
        for u in uppers:
            s, lg = _poch_sign_log(u, j)
            sign *= s
            total += lg
        for v in system.nus:
            total -= sp.gammaln(v + 1 + j) - sp.gammaln(v + 1)
        signs[j] = sign
        logs[j] = total
    return signs, logs


def poly_values(system, n, x):
    """p_n(x), vectorized over positive x."""
    x = np.asarray(x, dtype=float)
    signs, logs = poly_coeff_sign_log(system, n)
    j = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        expo = logs[None, :] + j[None, :] * np.log(x.ravel())[:, None]
    shift = expo.max(axis=1, keepdims=True)
    vals = (signs[None, :] * np.exp(expo - shift)).sum(axis=1) * np.exp(shift[:, 0])
    return vals.reshape(x.shape)


def psi_params(system, n):
    """Meijer G parameters of psi_n for each family."""
    if system.family == GINIBRE_FAMILY:
        return MeijerParams(m=system.n_direct + 1, n=0,
                            a=(-float(n),), b=(0.0,) + system.nus)
    if system.family == MIXED_FAMILY:
        a = tuple(-system.n_base - u for u in system.mus) + (-float(n),)
        return MeijerParams(m=system.n_direct + 1, n=system.n_inverse,
                            a=a, b=(0.0,) + system.nus)
    return MeijerParams(m=system.n_direct + 1, n=0,
                        a=(-float(n),) + tuple(float(k) for k in system.kappas),
                        b=system.nus + (0.0,))


def psi_values(system, n, x, tol=1e-11):
    """psi_n(x), vectorized over positive x."""
    x = np.asarray(x, dtype=float)
    return meijer_g_many(psi_params(system, n), x.ravel(), tol=tol).reshape(x.shape)


def weight_params(system, k):
    """Meijer G parameters of the k-th jpdf weight function w_k."""
    nus = system.nus
    b = nus[:-1] + (nus[-1] + k,)
    if system.family == GINIBRE_FAMILY:
        return MeijerParams(m=len(nus), n=0, a=(), b=b)
    if system.family == MIXED_FAMILY:
        a = tuple(-system.n_base - u for u in system.mus)
        return MeijerParams(m=len(nus), n=system.n_inverse, a=a, b=b)
    a = tuple(float(kk) for kk in system.kappas[:-1])
    a += (system.kappas[-1] - system.n_base + k + 1.0,)
    return MeijerParams(m=len(nus), n=0, a=a, b=b)


def weight_values(system, k, x, tol=1e-11):
    x = np.asarray(x, dtype=float)
    return meijer_g_many(weight_params(system, k), x.ravel(), tol=tol).reshape(x.shape)


def weight_log_mellin(system, k, s):
    """log of the Mellin transform int x^{s-1} w_k(x) dx (mpmath, exact)."""
    nus, s = system.nus, mpmath.mpf(s)
    total = mpmath.mpf(0)
    for v in nus[:-1]:
        total += mpmath.loggamma(v + s)
    total += mpmath.loggamma(nus[-1] + k + s)
    if system.family == MIXED_FAMILY:
        for u in system.mus:
            total += mpmath.loggamma(1 + system.n_base + u - s)
    elif system.family == TRUNCATED_FAMILY:
        for kk in system.kappas[:-1]:
            total -= mpmath.loggamma(kk + s)
        total -= mpmath.loggamma(system.kappas[-1] - system.n_base + k + 1 + s)
    return total


def psi_log_mellin(system, n, s):
    """log of the Mellin transform of psi_n (mpmath).

    Returns None for the exact zeros at integer s <= n, where the
    reciprocal Gamma(s - n) vanishes.
    """
    s = mpmath.mpf(s)
    if s - n <= 0 and mpmath.isint(s - n):
        return None
    total = mpmath.loggamma(s) - mpmath.loggamma(s - n)
    for v in system.nus:
        total += mpmath.loggamma(v + s)
    if system.family == MIXED_FAMILY:
        for u in system.mus:
            total += mpmath.loggamma(1 + system.n_base + u - s)
    elif system.family == TRUNCATED_FAMILY:
        for kk in system.kappas:
            total -= mpmath.loggamma(kk + s)
    return total


def kernel_sum(system, x, y, tol=1e-11):
    """K_N(x, y) via the biorthogonal sum (scalars or broadcastable arrays)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = np.zeros(np.broadcast(x, y).shape)
    for n in range(system.n_base):
        total = total + (poly_values(system, n, x) * psi_values(system, n, y, tol=tol)
                         * np.exp(-log_h(system, n)))
    return total


def kernel_contour(system, x, y, tol=1e-9):
    """K_N(x, y) via the double-contour representation (Ginibre family).

    The closed contour encircles the integer poles and is evaluated as
    a residue sum; the remaining line integral runs along Re s = -1/2
    and is computed by the same trapezoid scheme as the Meijer G
    quadrature.
    """
    if system.family != GINIBRE_FAMILY:
        raise UnsupportedParamsError("contour kernel implemented for the "
                                     "Ginibre family")
    x, y = float(x), float(y)
    nn = system.n_base
    nus = (0.0,) + tuple(float(v) for v in system.nus)
    ks = np.arange(nn)

    def line(t):
        s = -0.5 + 1j * t
        lg = np.zeros_like(s)
        for v in nus:
            lg = lg + sp.loggamma(s + v + 1.0)
        lg = lg - sp.loggamma(s - nn + 1.0)
        base = np.exp(lg + (-s - 1.0) * math.log(y))
        # shape (len(t), len(ks))
        return base[:, None] / (s[:, None] - ks[None, :])

    t_max = 8.0
    for _ in range(40):
        if np.abs(line(np.array([t_max]))).max() < 1e-6 * tol:
            break
        t_max *= 1.4
    h = 0.25
    prev = None
    for _ in range(10):
        t = np.arange(0.0, t_max + h, h)
        vals = line(t)
        integrals = h * (vals[0].real + 2.0 * vals[1:].real.sum(axis=0)) / (2.0 * np.pi)
        if prev is not None and np.all(
                np.abs(integrals - prev) <= tol * np.maximum(np.abs(integrals), 1e-280)):
            break
        prev = integrals
        h *= 0.5
    log_amp = ks * math.log(x) - sp.gammaln(nn - ks)
    for v in nus:
        log_amp = log_amp - sp.gammaln(ks + v + 1.0)
    signs = (-1.0) ** (nn - 1 - ks)
    return float((signs * np.exp(log_amp) * integrals).sum())


def sv_density(system, xs, tol=1e-11):
    """One-point density of the squared singular values, R_1(x) = K_N(x, x)."""
    xs = np.asarray(xs, dtype=float)
    return kernel_sum(system, xs, xs, tol=tol)


def correlations(system, xs, tol=1e-11):
    """k-point correlation det[K_N(x_i, x_j)] at a tuple of points."""
    xs = np.asarray(xs, dtype=float)
    mat = kernel_sum(system, xs[:, None], xs[None, :], tol=tol)
    return float(np.linalg.det(mat))


def gram_matrix(system, nmax, dps=40):
    """Gram matrix int p_k psi_l dx for k, l <= nmax via exact Mellin moments.

    Returns the matrix scaled by exp(-log h_k) row-wise, so the exact
    value is the identity.
    """
    out = np.empty((nmax + 1, nmax + 1))
    with mpmath.workdps(dps):
        for k in range(nmax + 1):
            signs, logs = poly_coeff_sign_log(system, k)
            for ell in range(nmax + 1):
                total = mpmath.mpf(0)
                for j in range(k + 1):
                    if signs[j] == 0.0:
                        continue
                    lm = psi_log_mellin(system, ell, j + 1)
                    if lm is None:
                        continue
                    total += (mpmath.mpf(signs[j])
                              * mpmath.exp(mpmath.mpf(logs[j]) + lm))
                out[k, ell] = float(total * mpmath.exp(-mpmath.mpf(log_h(system, k))))
    return out


def check_multiple_orthogonality(system, nmax, dps=40):
    """Type-II multiple orthogonality residuals of the polynomials p_n.

    Checks int x^l p_n(x) w_k(x) dx = 0 for k = 0..M-1 and
    l = 0..ceil((n-k)/M)-1, using exact Mellin moments.  Residuals are
    relative to the sum of term magnitudes.

    Returns
    -------
    dict with keys 'family', 'max_residual', 'entries'
        Each entry is (n, k, l, relative residual).
    """
    m_count = system.n_direct
    entries = []
    with mpmath.workdps(dps):
        for n in range(1, nmax + 1):
            signs, logs = poly_coeff_sign_log(system, n)
            for k in range(m_count):
                lmax = math.ceil((n - k) / m_count) - 1
                for ell in range(lmax + 1):
                    total = mpmath.mpf(0)
                    scale = mpmath.mpf(0)
                    for j in range(n + 1):
                        if signs[j] == 0.0:
                            continue
                        term = (mpmath.mpf(signs[j])
                                * mpmath.exp(mpmath.mpf(logs[j])
                                             + weight_log_mellin(system, k, ell + j + 1)))
                        total += term
                        scale += abs(term)
                    entries.append((n, k, ell, float(abs(total) / scale)))
    return {
        "family": system.family,
        "max_residual": max(e[3] for e in entries) if entries else 0.0,
        "entries": entries,
    }


def _quad_nodes(system, order=80):
    """Graded Gauss-Legendre panels covering the support of the weights."""
    if system.family == TRUNCATED_FAMILY:
        edges = np.concatenate([[0.0], np.geomspace(1e-8, 1.0, 24)])
    else:
        m_count = system.n_direct
        x_max = (80.0 / max(m_count, 1)) ** m_count
        if system.family == MIXED_FAMILY:
            x_max *= 4.0
        edges = np.concatenate([[0.0], np.geomspace(1e-8, x_max, 32)])
    xg, wg = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi - lo) * xg + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def check_recurrence(system, n_values, x_check=None, tol=1e-11):
    """Verify the M+2 term recurrence of the biorthogonal functions.

    The coefficients a_{m,n} and b_{m,n} are computed by quadrature
    from their defining integrals and the recurrences are checked
    pointwise.  Requires the Ginibre family (no recurrence is known for
    mixed products with inverse factors).

    Returns
    -------
    dict with keys 'max_poly_residual', 'max_psi_residual', 'coefficients'
    """
    if system.family not in (GINIBRE_FAMILY, TRUNCATED_FAMILY):
        raise UnsupportedParamsError("recurrence requires multiple orthogonality "
                                     "(no inverse factors)")
    if x_check is None:
        x_check = np.linspace(0.1, 5.0, 8)
        if system.family == TRUNCATED_FAMILY:
            x_check = np.linspace(0.05, 0.95, 8)
    x_check = np.asarray(x_check, dtype=float)
    nodes, wq = _quad_nodes(system)
    m_count = system.n_direct
    poly_res = 0.0
    psi_res = 0.0
    coeffs = {}
    for n in n_values:
        if n < m_count:
            raise DomainError("recurrence check needs n >= M")
        p_n = poly_values(system, n, nodes)
        a = np.empty(m_count + 1)
        for m in range(m_count + 1):
            psi = psi_values(system, n - m, nodes, tol=tol)
            a[m] = float((wq * nodes * p_n * psi).sum()
                         * math.exp(-log_h(system, n - m)))
        coeffs[("a", n)] = a
        lhs = x_check * poly_values(system, n, x_check)
        rhs = poly_values(system, n + 1, x_check)
        for m in range(m_count + 1):
            rhs = rhs + a[m] * poly_values(system, n - m, x_check)
        scale = np.abs(lhs).max()
        poly_res = max(poly_res, float(np.abs(lhs - rhs).max() / scale))

        psi_n = psi_values(system, n, nodes, tol=tol)
        b = np.empty(m_count + 1)
        for m in range(m_count + 1):
            p_nm = poly_values(system, n + m, nodes)
            b[m] = float((wq * nodes * p_nm * psi_n).sum()
                         * math.exp(-log_h(system, n)))
        coeffs[("b", n)] = b
        lhs = (x_check * psi_values(system, n, x_check, tol=tol)
               * math.exp(-log_h(system, n)))
        rhs = psi_values(system, n - 1, x_check, tol=tol) * math.exp(-log_h(system, n - 1))
        for m in range(m_count + 1):
            rhs = rhs + (b[m] * psi_values(system, n + m, x_check, tol=tol)
                         * math.exp(-log_h(system, n + m)))
        scale = np.abs(lhs).max()
        psi_res = max(psi_res, float(np.abs(lhs - rhs).max() / scale))
    return {
        "family": system.family,
        "max_poly_residual": poly_res,
        "max_psi_residual": psi_res,
        "coefficients": coeffs,
    }

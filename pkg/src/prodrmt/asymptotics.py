"""Limiting correlation kernels and finite-size convergence experiments.

Implements the local scaling limits of the product ensembles: origin
kernels for complex eigenvalues, bulk and soft-edge Ginibre kernels,
the weak-non-unitarity kernel for truncated factors, and the hard-edge
kernels for squared singular values together with their classical
Bessel, sine and Airy reductions.  Convergence helpers rebuild the
finite-size models at increasing matrix dimension and report the
deviation from the limit on fixed grids.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.special as _sps

from . import ensembles as _ens
from . import exact_ev as _ev
from . import exact_sv as _sv
from .specfun import (
    DomainError,
    MeijerParams,
    UnsupportedParamsError,
    airy_ai,
    airy_ai_prime,
    bessel_j,
    bessel_j_prime,
    erfc_complex,
    meijer_g_many,
    pfq,
)

KERNEL_KINDS = (
    "OriginHypergeometric",
    "OriginTruncated",
    "BulkGinibre",
    "SoftEdgeErfc",
    "WeakNonUnitarity",
    "MeijerHardEdge",
    "MeijerHardEdgeTruncated",
    "Bessel",
    "Sine",
    "Airy",
)

# Separation below which the removable x = y singularity of the
# Bessel/Airy kernels switches to a symmetric difference quotient.
_COINCIDENCE_EPS = 1e-6


@dataclasses.dataclass(frozen=True)
class LimitKernel:
    """A limiting correlation kernel with its shape parameters.

    Parameters
    ----------
    kind : str
        One of ``KERNEL_KINDS``.
    nus : tuple of float
        Direct-factor offsets; length M for the origin and hard-edge
        kinds, length 1 for ``Bessel``.
    kappas : tuple of float
        Fixed truncation offsets (length J) for the truncated kinds.
    n_factors : int
        Number of factors M for ``WeakNonUnitarity``.
    kappa : int
        Common truncation offset for ``WeakNonUnitarity``.
    z0 : complex
        Edge reference point for ``SoftEdgeErfc``; must lie where the
        caller's rescaling put the edge.
    """

    kind: str
    nus: tuple = ()
    kappas: tuple = ()
    n_factors: int = 1
    kappa: int = 0
    z0: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise UnsupportedParamsError("unknown kernel kind %r" % (self.kind,))
        object.__setattr__(self, "nus", tuple(float(v) for v in self.nus))
        object.__setattr__(self, "kappas", tuple(float(v) for v in self.kappas))
        if self.kind == "WeakNonUnitarity":
            if self.n_factors < 1 or self.kappa < 1:
                raise DomainError("weak kernel needs n_factors >= 1 and kappa >= 1")
        if self.kind == "Bessel" and len(self.nus) != 1:
            raise UnsupportedParamsError("Bessel kernel takes a single nu")


def _origin_series(kernel, w):
    """Hypergeometric origin kernel at w = u * conj(v)."""
    uppers = (1.0,) + tuple(k + 1.0 for k in kernel.kappas)
    lowers = tuple(v + 1.0 for v in kernel.nus)
    pref = math.exp(
        sum(_sps.gammaln(k + 1.0) for k in kernel.kappas)
        - sum(_sps.gammaln(v + 1.0) for v in kernel.nus)
    )
    return pref / math.pi * pfq(uppers, lowers, w)


def _weak_moment(q, t):
    """Integral of u^q e^{-t u} over u in [0, 1].

    Equals (-d/dt)^q (1 - e^{-t}) / t.  Alternating series for
    moderate |t|; lower incomplete gamma for large |t| where the
    series cancels badly.
    """
    if abs(t) <= 30.0:
        total = 0.0 + 0.0j
        term = 1.0 + 0.0j
        for k in range(10000):
            piece = term / (q + k + 1.0)
            total += piece
            if abs(piece) <= 1e-16 * max(abs(total), 1e-300):
                break
            term *= -t / (k + 1.0)
        return total
    import mpmath

    val = mpmath.gammainc(q + 1, 0, mpmath.mpc(t)) / mpmath.mpc(t) ** (q + 1)
    return complex(val)


def _hard_edge_integrand(kernel, x, y, s_nodes):
    """Pointwise integrand of the hard-edge s-integral at the nodes."""
    nus = kernel.nus
    kappas = kernel.kappas
    m = len(nus)
    j = len(kappas)
    pref = math.exp(
        sum(_sps.gammaln(k + 1.0) for k in kappas)
        - sum(_sps.gammaln(v + 1.0) for v in nus)
    )
    first = np.array(
        [
            pfq(tuple(k + 1.0 for k in kappas), tuple(v + 1.0 for v in nus), -s * x)
            for s in s_nodes
        ]
    )
    params = MeijerParams(m=m, n=0, a=kappas, b=tuple(nus) + (0.0,))
    second = meijer_g_many(params, s_nodes * y)
    return pref * first * second


def _hard_edge_value(kernel, x, y):
    """Gauss-Legendre on [0, 1], doubled until relative change < 1e-9."""
    if x <= 0 or y <= 0:
        raise DomainError("hard-edge kernel needs x, y > 0")
    order = 64
    prev = None
    for _ in range(5):
        nodes, weights = np.polynomial.legendre.leggauss(order)
        s_nodes = 0.5 * (nodes + 1.0)
        vals = _hard_edge_integrand(kernel, x, y, s_nodes)
        est = 0.5 * float(np.real(np.dot(weights, vals)))
        if prev is not None and abs(est - prev) <= 1e-9 * max(abs(est), 1e-30):
            return est
        prev = est
        order *= 2
    return prev


def bessel_kernel(nu, x, y):
    """Bessel hard-edge kernel K(x, y), antisymmetrized J/J' form."""
    sx, sy = math.sqrt(x), math.sqrt(y)
    if abs(x - y) < _COINCIDENCE_EPS:
        h = 0.5 * max(abs(x), 1.0) * 1e-5
        return 0.5 * (bessel_kernel(nu, x - h, y + h) + bessel_kernel(nu, x + h, y - h))
    num = sy * bessel_j(nu, sx) * bessel_j_prime(nu, sy) - sx * bessel_j_prime(
        nu, sx
    ) * bessel_j(nu, sy)
    return num / (2.0 * (x - y))


def eval_limit_kernel(kernel, u, v):
    """Evaluate a limiting kernel at a pair of points.

    Parameters
    ----------
    kernel : LimitKernel
    u, v : complex or float
        Eigenvalue-plane points for the origin/bulk/soft/weak kinds,
        positive reals for the hard-edge kinds.

    Returns
    -------
    complex or float
    """
    kind = kernel.kind
    if kind in ("OriginHypergeometric", "OriginTruncated"):
        return _origin_series(kernel, complex(u) * complex(v).conjugate())
    if kind == "BulkGinibre":
        u = complex(u)
        v = complex(v)
        return math.exp(-0.5 * abs(u) ** 2 - 0.5 * abs(v) ** 2) / math.pi * np.exp(
            u * v.conjugate()
        )
    if kind == "SoftEdgeErfc":
        u = complex(u)
        v = complex(v)
        z0 = complex(kernel.z0)
        gauss = math.exp(-0.5 * abs(u) ** 2 - 0.5 * abs(v) ** 2) * np.exp(
            u * v.conjugate()
        )
        arg = (z0.conjugate() * u + v.conjugate() * z0) / math.sqrt(2.0)
        return gauss * erfc_complex(arg) / (2.0 * math.pi)
    if kind == "WeakNonUnitarity":
        u = complex(u)
        v = complex(v)
        xj, yj = u.real, u.imag
        xl, yl = v.real, v.imag
        if xj <= 0 or xl <= 0:
            return 0.0
        q = kernel.n_factors * kernel.kappa
        t = (xj + xl + 1j * (yj - yl)) / kernel.n_factors
        pref = (4.0 * xj * xl) ** ((q - 1) / 2.0) / (math.pi * math.factorial(q - 1))
        return pref * _weak_moment(q, t)
    if kind in ("MeijerHardEdge", "MeijerHardEdgeTruncated"):
        return _hard_edge_value(kernel, float(u), float(v))
    if kind == "Bessel":
        return bessel_kernel(kernel.nus[0], float(u), float(v))
    if kind == "Sine":
        d = float(u) - float(v)
        if abs(d) < _COINCIDENCE_EPS:
            return math.pi * (1.0 - (math.pi * d) ** 2 / 6.0)
        return math.sin(math.pi * d) / d
    if kind == "Airy":
        x, y = float(u), float(v)
        if abs(x - y) < _COINCIDENCE_EPS:
            h = 1e-5
            return 0.5 * (
                eval_limit_kernel(kernel, x - h, y + h)
                + eval_limit_kernel(kernel, x + h, y - h)
            )
        num = airy_ai(x) * airy_ai_prime(y) - airy_ai_prime(x) * airy_ai(y)
        return num / (x - y)
    raise UnsupportedParamsError(kind)


def origin_kernel_for(spec):
    """Limit kernel matching a beta = 2 eigenvalue product at the origin.

    Direct Ginibre factors contribute their offsets to nus; truncated
    factors additionally contribute fixed kappas.  Inverse factors drop
    out of the limit entirely.
    """
    if spec.beta != 2:
        raise UnsupportedParamsError("origin limit implemented for beta = 2")
    nus = []
    kappas = []
    for f in spec.direct_factors:
        nus.append(float(f.offset))
        if f.kind == _ens.TRUNCATED_UNITARY:
            kappas.append(float(f.truncation))
    if kappas:
        return LimitKernel("OriginTruncated", nus=tuple(nus), kappas=tuple(kappas))
    return LimitKernel("OriginHypergeometric", nus=tuple(nus))


def origin_tail_bound(kernel, n, w_abs):
    """Geometric majorant for the truncated origin series tail.

    The omitted terms are term_n * sum_j (w / (n + 1))^j at most, term
    by term, since each Gamma ratio grows at least like n + 1.
    """
    nus = kernel.nus
    log_term = n * math.log(max(w_abs, 1e-300)) - sum(
        _sps.gammaln(v + n + 1.0) for v in nus
    )
    ratio = w_abs / (n + 1.0) ** len(nus)
    if ratio >= 1.0:
        return math.inf
    return math.exp(log_term) / (1.0 - ratio) / math.pi


def _rebuilt(spec, n):
    return _ens.ProductSpec(beta=spec.beta, n=n, factors=spec.factors)


def converge_origin(spec, n_values, grid=None):
    """Finite-size origin convergence report for a beta = 2 product.

    For pure Ginibre products the finite-size kernel is the truncated
    origin series and the sup deviation is compared against the
    next-term bound.  For products with inverse factors the one-point
    density is rescaled by N^{L/2} per point and N^L overall and
    compared to the L = 0 origin density.

    Returns
    -------
    dict
        {kind, spec, n_values, grid, deviations, bounds}
    """
    kernel = origin_kernel_for(spec)
    n_inverse = len(spec.inverse_factors)
    if grid is None:
        side = np.linspace(0.15, 0.95, 5)
        grid = [complex(a, b) for a in side for b in side[:1]] + [
            complex(a, a) for a in side
        ]
        grid = grid[:25]
    scale = math.exp(sum(_sps.gammaln(v + 1.0) for v in kernel.nus)) * math.pi
    deviations = []
    bounds = []
    if n_inverse == 0 and all(f.kind == _ens.GINIBRE for f in spec.factors):
        # Kernel-level comparison: the finite-N kernel is the same
        # series cut at n = N.
        pairs = [(u, v) for u in grid[:5] for v in grid[:5]]
        limit_vals = np.array([eval_limit_kernel(kernel, u, v) for u, v in pairs])
        for n in n_values:
            dev = 0.0
            bnd = 0.0
            for (u, v), kv in zip(pairs, limit_vals):
                w = complex(u) * complex(v).conjugate()
                tail = sum(
                    np.exp(k * np.log(w) - sum(_sps.gammaln(nu + k + 1.0) for nu in kernel.nus))
                    for k in range(n, n + 200)
                ) / math.pi
                dev = max(dev, abs(tail) * scale)
                bnd = max(bnd, origin_tail_bound(kernel, n, abs(w)) * scale)
            deviations.append(dev)
            bounds.append(bnd)
    else:
        ell = n_inverse
        pts = np.array(grid, dtype=complex)
        limit_density = np.array(
            [
                _origin_weight(kernel, abs(z) ** 2)
                * eval_limit_kernel(kernel, z, z).real
                for z in pts
            ]
        )
        for n in n_values:
            model = _ev.eigen_model(_rebuilt(spec, n))
            scaled = pts / n ** (ell / 2.0)
            finite = _ev.density(model, scaled) / float(n) ** ell
            deviations.append(float(np.max(np.abs(finite - limit_density))))
            bounds.append(None)
    return {
        "kind": kernel.kind,
        "spec": spec.to_json_dict(),
        "n_values": list(n_values),
        "grid": [[z.real, z.imag] for z in np.array(grid, dtype=complex)],
        "deviations": deviations,
        "bounds": bounds,
    }


def _origin_weight(kernel, r2):
    """Origin limit weight at squared radius r2."""
    if kernel.kappas:
        params = MeijerParams(
            m=len(kernel.nus), n=0, a=kernel.kappas, b=kernel.nus
        )
    else:
        params = MeijerParams(m=len(kernel.nus), n=0, a=(), b=kernel.nus)
    return float(meijer_g_many(params, np.array([r2]))[0])


def hard_edge_kernel_for(spec, growing=()):
    """Hard-edge limit kernel for a beta = 2 singular-value product.

    Parameters
    ----------
    spec : ProductSpec
    growing : sequence of int
        Indices (into spec.factors) of truncated factors whose
        truncation offset grows like the matrix dimension; those
        factors lose their kappa in the limit.
    """
    growing = set(growing)
    nus = []
    kappas = []
    for i, f in enumerate(spec.factors):
        if f.kind == _ens.GINIBRE:
            nus.append(float(f.offset))
        elif f.kind == _ens.TRUNCATED_UNITARY:
            nus.append(float(f.offset))
            if i not in growing:
                kappas.append(float(f.truncation))
        # inverse factors drop out of the hard-edge limit
    if kappas:
        return LimitKernel(
            "MeijerHardEdgeTruncated", nus=tuple(nus), kappas=tuple(kappas)
        )
    return LimitKernel("MeijerHardEdge", nus=tuple(nus))


def converge_hard_edge(spec, n_values, growing=(), grid=(0.5, 1.0, 2.0)):
    """Hard-edge convergence report for a beta = 2 singular-value product.

    Evaluates K_N(x / N^{L+1}, y / N^{L+1}) / N^{L+1} on the grid and
    reports the max relative deviation from the limit kernel, where L
    counts inverse factors plus growing truncations.

    Returns
    -------
    dict
        {kind, spec, n_values, grid, deviations}
    """
    kernel = hard_edge_kernel_for(spec, growing)
    ell = len(spec.inverse_factors) + len(set(growing))
    grid = tuple(float(g) for g in grid)
    limit_vals = {
        (x, y): eval_limit_kernel(kernel, x, y) for x in grid for y in grid
    }
    deviations = []
    for n in n_values:
        factors = list(spec.factors)
        for i in set(growing):
            f = factors[i]
            factors[i] = _ens.FactorSpec(
                kind=f.kind, offset=f.offset, truncation=n + f.truncation
            )
        system = _sv.sv_system(
            _ens.ProductSpec(beta=spec.beta, n=n, factors=tuple(factors))
        )
        scale = float(n) ** (ell + 1)
        dev = 0.0
        for (x, y), lim in limit_vals.items():
            fin = _sv.kernel_sum(system, x / scale, y / scale) / scale
            dev = max(dev, abs(fin - lim) / max(abs(lim), 1e-12))
        deviations.append(dev)
    return {
        "kind": kernel.kind,
        "spec": spec.to_json_dict(),
        "n_values": list(n_values),
        "grid": list(grid),
        "deviations": deviations,
    }


def weak_kernel_density(kappa, points, n_factors=1):
    """Determinantal density of the weak-non-unitarity limit.

    Parameters
    ----------
    kappa : int
        Common truncation offset; must be >= 1.
    points : sequence of complex
        Rescaled coordinates x + i y with x > 0 measured inward from
        the unit circle.
    n_factors : int
        Number of truncated factors in the product.

    Returns
    -------
    float
        det over the k x k weak-kernel matrix.
    """
    if kappa < 1:
        raise DomainError("weak kernel needs kappa >= 1")
    kernel = LimitKernel("WeakNonUnitarity", n_factors=n_factors, kappa=kappa)
    pts = [complex(p) for p in points]
    k = len(pts)
    mat = np.empty((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            mat[i, j] = eval_limit_kernel(kernel, pts[i], pts[j])
    return float(np.linalg.det(mat).real)

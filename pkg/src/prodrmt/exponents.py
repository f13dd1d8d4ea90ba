"""Lyapunov and stability exponents of long matrix products.

Exact per-step means and variances from digamma/trigamma formulas,
Monte Carlo estimators based on QR re-orthogonalization, the
permanental Gaussian approximation of the joint exponent density, and
the partial-sum (subspace) estimator with its variance combination.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import ensembles as _ens
from .specfun import DomainError, UnsupportedParamsError, digamma, trigamma
from .structured import permanent

FAMILY_GINIBRE = "Ginibre"
FAMILY_TRUNCATED = "TruncatedUnitary"
FAMILY_MIXED = "Mixed"


@dataclasses.dataclass(frozen=True)
class ExponentStatistics:
    """Exact per-step exponent means and scales for a product spec.

    Attributes
    ----------
    means : tuple of float
        lambda_1 < ... < lambda_N in nats per pass through the factor
        list (strictly increasing for pure Ginibre products).
    sigmas : tuple of float
        Per-step scales; the Monte Carlo variance of the n-th exponent
        after M passes is sigmas[n]^2 / M.
    beta : int
    family : str
    extrapolated : bool
        True when the variance formula is applied outside the regime
        where it has been confirmed (truncated factors at beta 1, 4).
    """

    means: tuple
    sigmas: tuple
    beta: int
    family: str
    extrapolated: bool = False


def _factor_mean_var(beta, factor, n):
    """Per-step mean and variance contribution of one factor at level n."""
    half = 0.5 * beta
    if factor.kind == _ens.GINIBRE:
        mean = 0.5 * math.log(2.0 / beta) + 0.5 * digamma(half * (factor.offset + n))
        var = 0.25 * trigamma(half * (factor.offset + n))
    elif factor.kind == _ens.TRUNCATED_UNITARY:
        lo = half * (factor.offset + n)
        hi = half * (factor.offset + factor.truncation + n)
        mean = 0.5 * (digamma(lo) - digamma(hi))
        var = 0.25 * (trigamma(lo) - trigamma(hi))
    else:
        raise UnsupportedParamsError(factor.kind)
    return mean, var


def _direct_counterpart(factor):
    """Direct factor whose exponents an inverse factor negates."""
    if factor.kind == _ens.INVERSE_GINIBRE:
        return _ens.FactorSpec(_ens.GINIBRE, factor.offset)
    return _ens.FactorSpec(_ens.TRUNCATED_UNITARY, factor.offset, factor.truncation)


def exact_exponents(spec):
    """Exact Lyapunov exponent statistics for a ProductSpec.

    Direct factors add their digamma means at level n; inverse factors
    subtract their direct means at the reflected level N + 1 - n, since
    inversion reverses the singular-value ordering.  Variances add
    (independent factors).
    """
    n_dim = spec.n
    means = np.zeros(n_dim)
    variances = np.zeros(n_dim)
    has_trunc = False
    has_inverse = False
    for factor in spec.factors:
        direct = factor.kind in (_ens.GINIBRE, _ens.TRUNCATED_UNITARY)
        base = factor if direct else _direct_counterpart(factor)
        if base.kind == _ens.TRUNCATED_UNITARY:
            has_trunc = True
        if not direct:
            has_inverse = True
        for n in range(1, n_dim + 1):
            level = n if direct else n_dim + 1 - n
            mean, var = _factor_mean_var(spec.beta, base, level)
            means[n - 1] += mean if direct else -mean
            variances[n - 1] += var
    if has_inverse or (has_trunc and any(f.kind == _ens.GINIBRE for f in spec.factors)):
        family = FAMILY_MIXED
    elif has_trunc:
        family = FAMILY_TRUNCATED
    else:
        family = FAMILY_GINIBRE
    return ExponentStatistics(
        means=tuple(means),
        sigmas=tuple(np.sqrt(variances)),
        beta=spec.beta,
        family=family,
        extrapolated=has_trunc and spec.beta in (1, 4),
    )


def _qr_positive(mat):
    """QR with positive diagonal; returns (Q, log|diag R|)."""
    q, r = np.linalg.qr(mat)
    d = np.real(np.diagonal(r)).copy()
    signs = np.where(d < 0, -1.0, 1.0)
    q = q * signs
    return q, np.log(np.abs(d))


def _apply_factor(spec, factor, frame, rng):
    """Multiply the frame by one factor (or its inverse) of the spec."""
    direct = factor.kind in (_ens.GINIBRE, _ens.TRUNCATED_UNITARY)
    mat = _ens.sample_factor(spec, factor if direct else _direct_counterpart(factor), rng)
    if direct:
        return mat @ frame
    return np.linalg.solve(mat, frame)


def _dedup_pairs(values):
    """Average adjacent entries of a doubly-degenerate sorted spectrum."""
    ordered = np.sort(values)
    return 0.5 * (ordered[0::2] + ordered[1::2])


def mc_lyapunov(spec, n_steps, replicas, rng=None, seed=None, rep_offset=0):
    """Monte Carlo Lyapunov exponents by per-step QR re-orthogonalization.

    Parameters
    ----------
    spec : ProductSpec
    n_steps : int
        Number of passes through the factor list; each pass applies
        every factor once.
    replicas : int
        Independent repetitions; the standard error is taken across
        replicas.

    Returns
    -------
    dict
        {means, standard_errors, replica_values, rejected, n_steps,
        replicas} with exponents sorted ascending to align with the
        exact statistics.
    """
    if n_steps < 1:
        raise DomainError("need n_steps >= 1")
    dim = 2 * spec.n if spec.beta == 4 else spec.n
    dtype = float if spec.beta == 1 else complex
    per_replica = []
    rejected = 0
    for rep in range(replicas):
        gen = rng if rng is not None else _ens.make_rng(seed, rep_offset + rep)
        frame = np.eye(dim, dtype=dtype)
        acc = np.zeros(dim)
        ok = True
        for _ in range(n_steps):
            for factor in spec.factors:
                frame = _apply_factor(spec, factor, frame, gen)
                frame, logs = _qr_positive(frame)
                acc += logs
                if not np.all(np.isfinite(acc)):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            rejected += 1
            continue
        exps = acc / n_steps
        if spec.beta == 4:
            exps = _dedup_pairs(exps)
        per_replica.append(np.sort(exps))
    vals = np.array(per_replica)
    return {
        "means": vals.mean(axis=0),
        "standard_errors": vals.std(axis=0, ddof=1) / math.sqrt(len(vals)),
        "replica_values": vals,
        "rejected": rejected,
        "n_steps": n_steps,
        "replicas": replicas,
    }


def mc_stability(spec, n_steps, replicas, rng=None, seed=None, rep_offset=0):
    """Monte Carlo stability exponents from product-matrix eigenvalues.

    Accumulates the product with per-step sup-norm rescaling, then
    reads off xi_n = log|z_n| / M from the eigenvalues z_n of the
    rescaled product.

    Returns
    -------
    dict
        {means, standard_errors, replica_values, xis, thetas, rejected}
        where xis/thetas hold per-replica sorted radial exponents and
        the matching eigenvalue phases.
    """
    import mpmath

    if n_steps < 1:
        raise DomainError("need n_steps >= 1")
    dim = 2 * spec.n if spec.beta == 4 else spec.n
    dtype = float if spec.beta == 1 else complex
    # Steps per double-precision chunk.  The chunk condition number
    # must stay well below 1/eps so that the chunk matrix retains its
    # full spectral information; the chunks themselves are multiplied
    # in arbitrary precision below.
    chunk_len = 12
    xi_rows = []
    theta_rows = []
    rejected = 0
    for rep in range(replicas):
        gen = rng if rng is not None else _ens.make_rng(seed, rep_offset + rep)
        chunks = []
        log_scales = []
        prod = np.eye(dim, dtype=dtype)
        in_chunk = 0
        ok = True
        for step in range(n_steps):
            for factor in spec.factors:
                prod = _apply_factor(spec, factor, prod, gen)
            in_chunk += 1
            if in_chunk == chunk_len or step == n_steps - 1:
                peak = np.max(np.abs(prod))
                if not np.isfinite(peak) or peak == 0.0:
                    ok = False
                    break
                chunks.append(prod / peak)
                log_scales.append(math.log(peak))
                prod = np.eye(dim, dtype=dtype)
                in_chunk = 0
        if not ok:
            rejected += 1
            continue
        # Dynamic range of the full product bounds the precision needed
        # for the chunk product to resolve its smallest eigenvalue.
        upper = sum(log_scales)
        log_det = sum(
            float(np.linalg.slogdet(c)[1]) + dim * s
            for c, s in zip(chunks, log_scales)
        )
        span = dim * upper - log_det
        digits = max(40, int(span / math.log(10.0)) + 30)
        with mpmath.workdps(digits):
            acc = mpmath.matrix(chunks[-1].tolist())
            for c in chunks[-2::-1]:
                acc = acc * mpmath.matrix(c.tolist())
            eigs = mpmath.eig(acc, left=False, right=False)
        radii = np.array([float(mpmath.log(abs(z))) for z in eigs]) + upper
        phases = np.array([float(mpmath.arg(z)) for z in eigs])
        order = np.argsort(radii)
        xis = radii[order] / n_steps
        thetas = phases[order]
        if spec.beta == 4:
            xis = _dedup_pairs(xis)
            # Conjugate pairs share a radius; keep the upper-half-plane
            # phase of each pair.
            thetas = np.abs(thetas).reshape(-1, 2).max(axis=1)
        xi_rows.append(xis)
        theta_rows.append(thetas)
    vals = np.array(xi_rows)
    return {
        "means": vals.mean(axis=0),
        "standard_errors": vals.std(axis=0, ddof=1) / math.sqrt(len(vals)),
        "replica_values": vals,
        "xis": vals,
        "thetas": np.array(theta_rows),
        "rejected": rejected,
        "n_steps": n_steps,
        "replicas": replicas,
    }


def permanental_jpdf(stats, n_steps, xis):
    """Permanental Gaussian approximation of the joint exponent density.

    Value is per[g_i(xi_j)] with g_i a Gaussian of mean lambda_i and
    variance sigma_i^2 / M; symmetric in the xi's, with unit mass on
    the ordered sector.

    Parameters
    ----------
    stats : ExponentStatistics
    n_steps : int
        Number of passes M; fluctuations scale like 1 / sqrt(M).
    xis : sequence of float
    """
    xis = np.asarray(xis, dtype=float)
    n_dim = len(stats.means)
    if len(xis) != n_dim:
        raise DomainError("need one point per exponent")
    mat = np.empty((n_dim, n_dim))
    for i in range(n_dim):
        var = stats.sigmas[i] ** 2 / n_steps
        mat[i, :] = np.exp(-0.5 * (xis - stats.means[i]) ** 2 / var) / math.sqrt(
            2.0 * math.pi * var
        )
    return permanent(mat)


def newman_partial_sum(spec, k, n_steps, replicas, rng=None, seed=None, rep_offset=0):
    """Partial-sum estimator of the top-k Lyapunov exponents.

    Tracks a k-dimensional frame A and accumulates
    (1/2) log det(A' X'X A) per factor application; the supremum over
    subspaces is realized by the dominant subspace that the iteration
    converges to.  Also reports the variance of the partial sum across
    replicas times M, which approximates the sum of the top-k sigma^2
    when covariances are negligible.

    Returns
    -------
    dict
        {estimate, standard_error, replica_values, scaled_variance,
        rejected}
    """
    if not 1 <= k <= spec.n:
        raise DomainError("need 1 <= k <= n")
    ncols = 2 * k if spec.beta == 4 else k
    dim = 2 * spec.n if spec.beta == 4 else spec.n
    dtype = float if spec.beta == 1 else complex
    values = []
    rejected = 0
    for rep in range(replicas):
        gen = rng if rng is not None else _ens.make_rng(seed, rep_offset + rep)
        frame = np.eye(dim, ncols, dtype=dtype)
        acc = 0.0
        ok = True
        for _ in range(n_steps):
            for factor in spec.factors:
                frame = _apply_factor(spec, factor, frame, gen)
                frame, logs = _qr_positive(frame)
                acc += float(np.sum(logs))
                if not math.isfinite(acc):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            rejected += 1
            continue
        values.append(acc / n_steps / (2.0 if spec.beta == 4 else 1.0))
    vals = np.array(values)
    return {
        "estimate": float(vals.mean()),
        "standard_error": float(vals.std(ddof=1) / math.sqrt(len(vals))),
        "replica_values": vals,
        "scaled_variance": float(vals.var(ddof=1) * n_steps),
        "rejected": rejected,
        "n_steps": n_steps,
        "replicas": replicas,
    }

r"""Samplers for products of random matrices.

Factor types: Ginibre, inverse Ginibre, truncated unitary, and inverse
truncated unitary, for Dyson indices beta = 1, 2, 4.  Rectangular
factors are realized through the induced square construction, so a
product is described by its base dimension N together with the multiset
of dimension offsets.

Entry variance convention: P(X) ~ exp[-(beta/2gamma) Tr X X^dagger]
with gamma = 1 for beta = 1, 2 and gamma = 2 for beta = 4.  Concretely,
beta = 1 entries are N(0, 1); beta = 2 entries have E|X_ij|^2 = 1;
beta = 4 quaternion entries a + b j carry E|a|^2 = E|b|^2 = 1/2 in the
2x2 complex representation [[a, b], [-b*, a*]].

Quaternionic matrices are stored as their 2N x 2N complex
representation X = [[A, B], [-conj(B), conj(A)]], which satisfies
X = J conj(X) J^T for J = [[0, I], [-I, 0]].
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .specfun import DomainError

GINIBRE = "ginibre"
INVERSE_GINIBRE = "inverse_ginibre"
TRUNCATED_UNITARY = "truncated_unitary"
INVERSE_TRUNCATED_UNITARY = "inverse_truncated_unitary"

KINDS = (GINIBRE, INVERSE_GINIBRE, TRUNCATED_UNITARY, INVERSE_TRUNCATED_UNITARY)
_TRUNCATED = (TRUNCATED_UNITARY, INVERSE_TRUNCATED_UNITARY)
_INVERSE = (INVERSE_GINIBRE, INVERSE_TRUNCATED_UNITARY)


@dataclass(frozen=True)
class FactorSpec:
    """One factor of a matrix product.

    Attributes
    ----------
    kind : str
        One of `KINDS`.
    offset : int
        Rectangularity offset: nu for direct factors, mu for inverse
        factors.
    truncation : int or None
        Truncation depth kappa (direct) or tau (inverse); required for
        the truncated kinds and must exceed the offset.
    """

    kind: str
    offset: int = 0
    truncation: int = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError("unknown factor kind %r" % (self.kind,))
        if self.offset < 0:
            raise DomainError("offset must be a non-negative integer")
        if self.kind in _TRUNCATED:
            if self.truncation is None:
                raise DomainError("truncated factors require a truncation depth")
            if self.truncation - self.offset <= 0:
                raise DomainError("truncated factors require truncation > offset")
        elif self.truncation is not None:
            raise DomainError("only truncated factors take a truncation depth")

    @property
    def inverse(self):
        return self.kind in _INVERSE


@dataclass(frozen=True)
class ProductSpec:
    """A matrix-product ensemble: Dyson index, base dimension, factors."""

    beta: int
    n: int
    factors: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if self.beta not in (1, 2, 4):
            raise DomainError("beta must be 1, 2, or 4")
        if self.n < 1:
            raise DomainError("base dimension must be positive")
        if not self.factors:
            raise DomainError("need at least one factor")
        for f in self.factors:
            if not isinstance(f, FactorSpec):
                raise DomainError("factors must be FactorSpec instances")

    @property
    def gamma(self):
        return 2 if self.beta == 4 else 1

    @property
    def direct_factors(self):
        return tuple(f for f in self.factors if not f.inverse)

    @property
    def inverse_factors(self):
        return tuple(f for f in self.factors if f.inverse)

    def to_json_dict(self):
        return {
            "beta": self.beta,
            "n": self.n,
            "factors": [
                {"kind": f.kind, "offset": f.offset, "truncation": f.truncation}
                for f in self.factors
            ],
        }

    @staticmethod
    def from_json_dict(d):
        return ProductSpec(
            beta=int(d["beta"]),
            n=int(d["n"]),
            factors=tuple(
                FactorSpec(
                    kind=f["kind"],
                    offset=int(f.get("offset", 0)),
                    truncation=None if f.get("truncation") is None else int(f["truncation"]),
                )
                for f in d["factors"]
            ),
        )


def ginibre_spec(beta, n, nus):
    """Shorthand for a product of Ginibre factors with offsets `nus`."""
    return ProductSpec(beta, n, tuple(FactorSpec(GINIBRE, v) for v in nus))


def truncated_spec(beta, n, nus, kappas):
    """Shorthand for a product of truncated-unitary factors."""
    return ProductSpec(
        beta, n, tuple(FactorSpec(TRUNCATED_UNITARY, v, k) for v, k in zip(nus, kappas)))


def inverse_mixed_spec(beta, n, nus, mus):
    """Shorthand for Ginibre factors `nus` with inverse Ginibre factors `mus`."""
    fs = tuple(FactorSpec(GINIBRE, v) for v in nus)
    fs += tuple(FactorSpec(INVERSE_GINIBRE, u) for u in mus)
    return ProductSpec(beta, n, fs)


@dataclass
class SpectrumSample:
    """One Monte Carlo draw of a realized product."""

    eigenvalues: np.ndarray = None
    squared_singular_values: np.ndarray = None
    seed: tuple = None


def make_rng(seed, stream=0):
    """Counter-based (Philox) generator for a given seed and stream index."""
    return np.random.Generator(np.random.Philox(key=(int(seed) << 16) + int(stream)))


def standard_normal_complex(rng, shape):
    """(R + i I)/sqrt(2) with independent standard-normal R, I; E|z|^2 = 1."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def quaternion_assemble(a, b):
    """Complex representation [[A, B], [-conj(B), conj(A)]] of A + B j."""
    return np.block([[a, b], [-b.conj(), a.conj()]])


def quaternion_enforce(x):
    """Project a 2N x 2N matrix onto the quaternionic structure X = J conj(X) J^T."""
    k = x.shape[0] // 2
    a = 0.5 * (x[:k, :k] + x[k:, k:].conj())
    b = 0.5 * (x[:k, k:] - x[k:, :k].conj())
    return quaternion_assemble(a, b)


def sample_ginibre(beta, rows, cols, rng):
    """Gaussian factor with the module's variance convention.

    beta = 4 returns the 2 rows x 2 cols complex representation.
    """
    if rows < 1 or cols < 1:
        raise DomainError("need rows, cols >= 1")
    if beta == 1:
        return rng.standard_normal((rows, cols))
    if beta == 2:
        return standard_normal_complex(rng, (rows, cols))
    if beta == 4:
        a = 0.5 * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
        b = 0.5 * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
        return quaternion_assemble(a, b)
    raise DomainError("beta must be 1, 2, or 4")


def sample_haar_unitary(beta, k, rng):
    """Haar-distributed orthogonal / unitary / unitary-symplectic matrix.

    beta = 1, 2 use QR of a Ginibre matrix with the R-diagonal phase
    correction; beta = 4 uses quaternionic Gram-Schmidt on the 2k x 2k
    complex representation, returned in block layout.
    """
    if beta in (1, 2):
        g = sample_ginibre(beta, k, k, rng)
        q, r = np.linalg.qr(g)
        d = np.diagonal(r)
        return q * (d / np.abs(d))
    if beta != 4:
        raise DomainError("beta must be 1, 2, or 4")
    z = sample_ginibre(4, k, k, rng)
    dim = 2 * k
    basis = np.empty((dim, dim), dtype=complex)
    jmat_top = np.arange(k, dim)
    for j in range(k):
        v = z[:, j].copy()
        for _ in range(2):  # one re-orthogonalization pass for stability
            for i in range(2 * j):
                col = basis[:, _interleave(i, k)]
                v -= (col.conj() @ v) * col
        v /= np.linalg.norm(v)
        # Partner column fixed by the quaternionic structure.
        w = np.concatenate([-v[k:].conj(), v[:k].conj()])
        basis[:, j] = v
        basis[:, k + j] = w
    return basis


def _interleave(i, k):
    # Visit stored columns in the order v_0, w_0, v_1, w_1, ...
    return (i // 2) + (k if i % 2 else 0)


def sample_truncated_unitary(beta, k, rows, cols, rng):
    """Upper-left rows x cols block of a Haar matrix of size k.

    All sizes count quaternion units for beta = 4; the result is the
    2 rows x 2 cols complex representation in that case.
    """
    if k < max(rows, cols):
        raise DomainError("need k >= max(rows, cols)")
    u = sample_haar_unitary(beta, k, rng)
    if beta in (1, 2):
        return u[:rows, :cols]
    a = u[:rows, :cols]
    b = u[:rows, k:k + cols]
    return quaternion_assemble(a, b)


def _psd_sqrt(w):
    vals, vecs = np.linalg.eigh(w)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def sample_induced_ginibre(beta, n, nu, rng):
    """Square factor with density det(XX+)^{beta nu/2 gamma} x Gaussian.

    Sampled as U (G+G)^{1/2} with U Haar of size n and G an
    (n + nu) x n Ginibre block; for nu = 0 this is a plain square
    Ginibre factor.
    """
    if nu < 0:
        raise DomainError("nu must be non-negative")
    if nu == 0:
        return sample_ginibre(beta, n, n, rng)
    g = sample_ginibre(beta, n + nu, n, rng)
    s = _psd_sqrt(g.conj().T @ g)
    u = sample_haar_unitary(beta, n, rng)
    y = u @ s
    return quaternion_enforce(y) if beta == 4 else y


def sample_induced_truncated(beta, n, nu, kappa, rng):
    """Square truncated factor with offsets (nu, kappa).

    The (n + nu) x n block R of a Haar matrix of size kappa + n has
    R+R distributed with matrix density det(W)^nu det(1-W)^{kappa-nu-n},
    which is exactly the induced square reduction of the rectangular
    truncated factor; the factor itself is U (R+R)^{1/2}.
    """
    if kappa - nu <= 0:
        raise DomainError("need kappa > nu")
    k = kappa + n
    r = sample_truncated_unitary(beta, k, n + nu, n, rng)
    if nu == 0:
        return r
    s = _psd_sqrt(r.conj().T @ r)
    u = sample_haar_unitary(beta, n, rng)
    y = u @ s
    return quaternion_enforce(y) if beta == 4 else y


def sample_factor(spec, factor, rng):
    """Draw one factor matrix of a ProductSpec (representation size for beta=4)."""
    n = spec.n
    if factor.kind in (GINIBRE, INVERSE_GINIBRE):
        return sample_induced_ginibre(spec.beta, n, factor.offset, rng)
    return sample_induced_truncated(spec.beta, n, factor.offset, factor.truncation, rng)


def _accumulate_chains(spec, rng):
    dim = 2 * spec.n if spec.beta == 4 else spec.n
    dtype = float if spec.beta == 1 else complex
    x_chain = np.eye(dim, dtype=dtype)
    y_chain = np.eye(dim, dtype=dtype)
    for f in spec.factors:
        mat = sample_factor(spec, f, rng)
        if f.inverse:
            y_chain = y_chain @ mat
        else:
            x_chain = mat @ x_chain
    return x_chain, y_chain, bool(spec.inverse_factors)


def _half_plane(eigs, n):
    """Upper-half-plane representatives of a conjugation-closed multiset."""
    order = np.argsort(-eigs.imag)
    chosen = eigs[order][:n]
    return chosen[np.argsort(chosen.real)]


def realize_product(spec, rng, want_eigenvalues=True, want_singular_values=True,
                    seed_record=None):
    """Draw one SpectrumSample from a ProductSpec.

    Inverse factors enter through the generalized eigenvalue problem
    det[Y_1...Y_L lambda - X_M...X_1] = 0 solved by QZ (no explicit
    inversion); singular values come from an SVD of the accumulated
    product with growth-controlled rescaling.
    """
    x_chain, y_chain, has_inverse = _accumulate_chains(spec, rng)
    sample = SpectrumSample(seed=seed_record)
    if want_eigenvalues:
        if has_inverse:
            eigs = scipy.linalg.eigvals(x_chain, y_chain)
        else:
            eigs = np.linalg.eigvals(x_chain)
        if not np.all(np.isfinite(eigs)):
            return None
        if spec.beta == 4:
            eigs = _half_plane(eigs, spec.n)
        sample.eigenvalues = eigs
    if want_singular_values:
        if has_inverse:
            prod = scipy.linalg.solve(y_chain, x_chain)
        else:
            prod = x_chain
        if not np.all(np.isfinite(prod)):
            return None
        svals = np.linalg.svd(prod, compute_uv=False)
        if spec.beta == 4:
            svals = np.sort(svals)[::-1][::2]
        sample.squared_singular_values = np.sort(svals) ** 2
    return sample


def sample_batch(spec, n_samples, rng, want_eigenvalues=True,
                 want_singular_values=False, seed=None):
    """Draw many SpectrumSamples, counting rejected (non-finite) draws.

    Returns
    -------
    (list of SpectrumSample, int)
        The samples and the number of rejections.
    """
    out = []
    rejected = 0
    while len(out) < n_samples:
        s = realize_product(spec, rng, want_eigenvalues, want_singular_values,
                            seed_record=seed)
        if s is None:
            rejected += 1
            if rejected > max(100, n_samples // 10):
                raise ArithmeticError("excessive rejection rate in sample_batch")
            continue
        out.append(s)
    return out, rejected


def eigenvalue_radii_batch(spec, n_samples, rng):
    """Vectorized eigenvalue-radius draws; returns array (n_samples, N).

    Fast path for Monte Carlo density comparisons.  Uses batched matmul
    and batched eigensolves for pure direct products and a per-sample
    QZ solve when inverse factors are present.
    """
    n = spec.n
    dim = 2 * n if spec.beta == 4 else n
    has_inverse = bool(spec.inverse_factors)
    chunk = max(1, min(n_samples, 20000))
    radii = np.empty((n_samples, n))
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = np.broadcast_to(np.eye(dim, dtype=complex), (m, dim, dim)).copy()
        y = np.broadcast_to(np.eye(dim, dtype=complex), (m, dim, dim)).copy() \
            if has_inverse else None
        for f in spec.factors:
            mats = np.stack([sample_factor(spec, f, rng) for _ in range(m)])
            if f.inverse:
                y = y @ mats
            else:
                x = mats @ x
        if has_inverse:
            eigs = np.stack([scipy.linalg.eigvals(x[i], y[i]) for i in range(m)])
        else:
            eigs = np.linalg.eigvals(x)
        r = np.abs(eigs)
        if spec.beta == 4:
            # Conjugate pairs share a radius; keep one representative each.
            r = np.sort(r, axis=1)[:, ::2]
        radii[done:done + m] = np.sort(r, axis=1)
        done += m
    return radii


def squared_singular_value_batch(spec, n_samples, rng):
    """Vectorized squared-singular-value draws; returns (n_samples, N)."""
    n = spec.n
    dim = 2 * n if spec.beta == 4 else n
    has_inverse = bool(spec.inverse_factors)
    chunk = max(1, min(n_samples, 20000))
    out = np.empty((n_samples, n))
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = np.broadcast_to(np.eye(dim, dtype=complex), (m, dim, dim)).copy()
        y = np.broadcast_to(np.eye(dim, dtype=complex), (m, dim, dim)).copy() \
            if has_inverse else None
        for f in spec.factors:
            mats = np.stack([sample_factor(spec, f, rng) for _ in range(m)])
            if f.inverse:
                y = y @ mats
            else:
                x = mats @ x
        if has_inverse:
            x = np.linalg.solve(y, x)
        svals = np.linalg.svd(x, compute_uv=False)
        if spec.beta == 4:
            svals = svals[:, ::2]
        out[done:done + m] = np.sort(svals, axis=1) ** 2
        done += m
    return out


def samples_to_csv(samples, path):
    """Write a batch of SpectrumSamples to columnar CSV.

    Columns: re, im, sv, replica, seed.  Eigenvalues and squared
    singular values are zipped per row; missing entries are blank.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im", "sv", "replica", "seed"])
        for idx, s in enumerate(samples):
            ev = s.eigenvalues if s.eigenvalues is not None else []
            sv = s.squared_singular_values if s.squared_singular_values is not None else []
            for j in range(max(len(ev), len(sv))):
                re = "%.17g" % ev[j].real if j < len(ev) else ""
                im = "%.17g" % ev[j].imag if j < len(ev) else ""
                x = "%.17g" % sv[j] if j < len(sv) else ""
                writer.writerow([re, im, x, idx, s.seed if s.seed is not None else ""])


def manifest_json(spec, extra=None):
    """JSON manifest string carrying the ProductSpec (stable key order)."""
    payload = {"spec": spec.to_json_dict()}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True)

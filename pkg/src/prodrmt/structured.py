"""Structured multilinear primitives: Pfaffian, permanent, scaled log-determinant."""

import numpy as np

from .specfun import DomainError


class SizeError(ValueError):
    """Matrix dimension beyond the supported exact-algorithm range."""


def _check_skew(a, tol=1e-12):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("pfaffian requires a square matrix")
    if a.shape[0] % 2 != 0:
        raise DomainError("pfaffian requires even dimension")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a + a.T).max() > tol * scale:
        raise DomainError("matrix is not antisymmetric")
    return a


def pfaffian(a):
    """Pfaffian of an even-dimensional antisymmetric matrix.

    Skew-symmetric Gaussian elimination with row/column pivoting;
    sign convention Pf([[0, 1], [-1, 0]]) = +1.

    Parameters
    ----------
    a : (2k, 2k) array_like
        Antisymmetric, real or complex.

    Returns
    -------
    complex
    """
    a = _check_skew(a).astype(complex).copy()
    dim = a.shape[0]
    pf = 1.0 + 0.0j
    for k in range(0, dim - 1, 2):
        # Pivot the largest entry of column k below the diagonal to row k+1.
        col = np.abs(a[k + 1:, k])
        piv = int(np.argmax(col)) + k + 1
        if col.max() == 0.0:
            return 0.0 + 0.0j
        if piv != k + 1:
            a[[k + 1, piv], :] = a[[piv, k + 1], :]
            a[:, [k + 1, piv]] = a[:, [piv, k + 1]]
            pf = -pf
        pf *= a[k, k + 1]
        if k + 2 < dim:
            tau = a[k + 2:, k] / a[k + 1, k]
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return complex(pf)


def permanent(b):
    """Permanent of a square matrix, Ryser inclusion-exclusion with Gray code.

    Parameters
    ----------
    b : (k, k) array_like
        k <= 14.

    Returns
    -------
    float or complex
    """
    b = np.asarray(b)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DomainError("permanent requires a square matrix")
    k = b.shape[0]
    if k > 14:
        raise SizeError("permanent limited to dimension <= 14")
    if k == 0:
        return 1.0
    row_sums = np.zeros(k, dtype=np.result_type(b.dtype, float))
    total = 0.0 * row_sums[0]
    old_gray = 0
    sign = +1
    for i in range(1, 2 ** k):
        gray = i ^ (i >> 1)
        changed = gray ^ old_gray
        j = changed.bit_length() - 1
        if gray & changed:
            row_sums = row_sums + b[:, j]
        else:
            row_sums = row_sums - b[:, j]
        old_gray = gray
        sign = -sign
        total = total + sign * np.prod(row_sums)
    value = total * (-1) ** k
    return value.item()


def logdet_scaled(a):
    """Overflow-safe determinant of a general complex matrix.

    Returns
    -------
    (float, complex)
        Pair (log-magnitude, unit phase) with det(a) = exp(logmag) * phase.
        A singular matrix gives (-inf, 0).
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("logdet_scaled requires a square matrix")
    sign, logabs = np.linalg.slogdet(a)
    if sign == 0:
        return -np.inf, 0.0 + 0.0j
    return float(logabs), complex(sign)

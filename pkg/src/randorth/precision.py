"""Dense linear algebra on object arrays of gmpy2 numbers.

Only what the triangular factorizations need: Householder QR returning the
``R`` factor with a positive real diagonal, triangular inversion and a small
pivoted solver.  Every routine runs inside a local gmpy2 context at the
requested precision.
"""
from __future__ import annotations

import numpy as np
import gmpy2
from gmpy2 import mpc, mpfr

from .errors import PrecisionInsufficientError


def context(bits: int):
    return gmpy2.context(gmpy2.get_context(), precision=int(bits))


def to_mp(a, bits: int) -> np.ndarray:
    """Exact conversion of a float/complex array to gmpy2 ``mpc`` objects."""
    a = np.asarray(a)
    out = np.empty(a.shape, dtype=object)
    with context(bits):
        flat = out.reshape(-1)
        for i, v in enumerate(a.reshape(-1)):
            v = complex(v)
            flat[i] = mpc(v.real, v.imag)
    return out


def to_complex(a: np.ndarray) -> np.ndarray:
    return np.array([complex(v) for v in a.reshape(-1)], dtype=complex).reshape(a.shape)


def _norm2(vec) -> mpfr:
    return sum((gmpy2.norm(v) for v in vec), mpfr(0))


def householder_r(A: np.ndarray, bits: int, rel_tol=None, labels=None) -> np.ndarray:
    """Upper-triangular ``R`` of ``A = QR`` with ``R[k, k] > 0``.

    ``A`` is an ``(m, n)`` object array with ``m >= n``.  A column whose
    remaining norm drops below ``rel_tol`` times its original norm raises
    :class:`PrecisionInsufficientError` naming that column.
    """
    m, n = A.shape
    with context(bits):
        if rel_tol is None:
            rel_tol = mpfr(2) ** (-(bits - 12))
        A = A.copy()
        col_norms = [gmpy2.sqrt(_norm2(A[:, k])) for k in range(n)]
        R = np.empty((n, n), dtype=object)
        R[:] = mpc(0)
        for k in range(n):
            x = A[k:, k]
            nrm = gmpy2.sqrt(_norm2(x))
            if nrm <= rel_tol * col_norms[k] or nrm == 0:
                name = labels[k] if labels is not None else k
                raise PrecisionInsufficientError(
                    f"column {name} is numerically dependent at {bits} bits", column=name)
            x0 = x[0]
            phase = x0 / abs(x0) if x0 != 0 else mpc(1)
            alpha = -phase * nrm
            v = x.copy()
            v[0] = v[0] - alpha
            vn2 = _norm2(v)
            if k + 1 < n:
                B = A[k:, k + 1:]
                w = np.array([c.conjugate() for c in v], dtype=object) @ B
                A[k:, k + 1:] = B - np.outer(v, w * (2 / vn2))
            # make the diagonal positive: scale row k by conj(-phase)
            s = -phase.conjugate()
            R[k, k] = mpc(nrm)
            if k + 1 < n:
                R[k, k + 1:] = A[k, k + 1:] * s
        return R


def upper_inverse(R: np.ndarray, bits: int) -> np.ndarray:
    """Inverse of an upper-triangular object matrix."""
    n = R.shape[0]
    with context(bits):
        C = np.empty((n, n), dtype=object)
        C[:] = mpc(0)
        for j in range(n):
            C[j, j] = 1 / R[j, j]
            for i in range(j - 1, -1, -1):
                acc = mpc(0)
                for k in range(i + 1, j + 1):
                    acc += R[i, k] * C[k, j]
                C[i, j] = -acc / R[i, i]
        return C


def gram(A: np.ndarray, bits: int) -> np.ndarray:
    """``A^H A`` for an object matrix."""
    with context(bits):
        AH = np.vectorize(lambda c: c.conjugate(), otypes=[object])(A).T
        return AH @ A


def solve(M: np.ndarray, b: np.ndarray, bits: int) -> np.ndarray:
    """Solve ``M x = b`` by Gaussian elimination with partial pivoting."""
    n = M.shape[0]
    with context(bits):
        a = M.copy()
        x = b.copy()
        for k in range(n):
            piv = max(range(k, n), key=lambda i: abs(a[i, k]))
            if a[piv, k] == 0:
                raise PrecisionInsufficientError(f"singular system at row {k}", column=k)
            if piv != k:
                a[[k, piv]] = a[[piv, k]]
                x[[k, piv]] = x[[piv, k]]
            f = a[k + 1:, k] / a[k, k]
            if k + 1 < n:
                a[k + 1:, k:] = a[k + 1:, k:] - np.outer(f, a[k, k:])
                x[k + 1:] = x[k + 1:] - f * x[k]
        out = np.empty(n, dtype=object)
        for i in range(n - 1, -1, -1):
            acc = x[i]
            for j in range(i + 1, n):
                acc -= a[i, j] * out[j]
            out[i] = acc / a[i, i]
        return out


def mpc_to_strings(z) -> list[str]:
    return [str(z.real), str(z.imag)]


def mpc_from_strings(pair, bits: int):
    with context(bits):
        return mpc(mpfr(pair[0], bits), mpfr(pair[1], bits))

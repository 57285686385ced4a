"""Pure-numpy versions of the compiled kernels in ``_ckernels.pyx``.

The root iteration here updates all roots at once (Jacobi sweep) so it can be
vectorized; the compiled version sweeps in place.  Both stop on the same test.
"""
from __future__ import annotations

import numpy as np


def _ratio(c: np.ndarray, z: np.ndarray):
    N = c.size - 1
    inside = np.abs(z) <= 1.0
    num = np.empty_like(z)
    den = np.empty_like(z)
    if inside.any():
        zi = z[inside]
        p = np.full(zi.shape, c[N])
        dp = np.zeros_like(zi)
        for k in range(N - 1, -1, -1):
            dp = dp * zi + p
            p = p * zi + c[k]
        num[inside], den[inside] = p, dp
    out = ~inside
    if out.any():
        zo = z[out]
        y = 1.0 / zo
        p = np.full(zo.shape, c[0])
        dp = np.zeros_like(zo)
        for k in range(1, N + 1):
            dp = dp * y + p
            p = p * y + c[k]
        num[out], den[out] = zo * p, N * p - y * dp
    return num, den


def aberth(coeffs: np.ndarray, init: np.ndarray, tol: float, max_iter: int):
    c = np.ascontiguousarray(coeffs, dtype=complex)
    z = np.array(init, dtype=complex, copy=True)
    N = z.size
    active = np.ones(N, dtype=bool)
    it = 0
    while it < max_iter and active.any():
        it += 1
        num, den = _ratio(c, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(diff == 0, 0.0, 1.0 / diff)
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            ratio = num / den
            w = ratio / (1.0 - ratio * s)
        w = np.where(num == 0, 0.0, w)
        w = np.where(den == 0, 1e-3 * (1.0 + np.abs(z)), w)
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        active = ~(np.abs(w) <= tol * (1.0 + np.abs(z)))
    return z, it, not active.any()


def poly_logabs(coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    z = np.asarray(points, dtype=complex)
    N = c.size - 1
    r = np.abs(z)
    inside = r <= 1.0
    out = np.empty(z.shape)
    with np.errstate(divide="ignore"):
        if inside.any():
            zi = z[inside]
            p = np.full(zi.shape, c[N])
            for k in range(N - 1, -1, -1):
                p = p * zi + c[k]
            out[inside] = np.log(np.abs(p))
        if (~inside).any():
            y = 1.0 / z[~inside]
            p = np.full(y.shape, c[0])
            for k in range(1, N + 1):
                p = p * y + c[k]
            out[~inside] = np.log(np.abs(p)) + N * np.log(r[~inside])
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: simultaneous root iteration and polynomial log-moduli.

Complex arithmetic is spelled out on real and imaginary parts.  Horner
evaluation loops over coefficients outside and points inside, which lets
the compiler vectorize the point loop.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport hypot, log, sqrt, INFINITY

cnp.import_array()


cdef inline void _ratio(const double[::1] cr, const double[::1] ci, Py_ssize_t N,
                        double zr, double zi, double* nr, double* ni,
                        double* dr, double* di) noexcept nogil:
    # Newton ratio p/p' = num/den; evaluated on the reversed polynomial when |z| > 1
    cdef double pr, pi, qr, qi, yr, yi, t, s
    cdef Py_ssize_t k
    if zr * zr + zi * zi <= 1.0:
        pr = cr[N]; pi = ci[N]; qr = 0.0; qi = 0.0
        for k in range(N - 1, -1, -1):
            t = qr * zr - qi * zi + pr
            qi = qr * zi + qi * zr + pi
            qr = t
            t = pr * zr - pi * zi + cr[k]
            pi = pr * zi + pi * zr + ci[k]
            pr = t
        nr[0] = pr; ni[0] = pi; dr[0] = qr; di[0] = qi
    else:
        s = 1.0 / (zr * zr + zi * zi)
        yr = zr * s; yi = -zi * s
        pr = cr[0]; pi = ci[0]; qr = 0.0; qi = 0.0
        for k in range(1, N + 1):
            t = qr * yr - qi * yi + pr
            qi = qr * yi + qi * yr + pi
            qr = t
            t = pr * yr - pi * yi + cr[k]
            pi = pr * yi + pi * yr + ci[k]
            pr = t
        # p(z) = z^N q(y):  p/p' = z q / (N q - y q')
        nr[0] = zr * pr - zi * pi
        ni[0] = zr * pi + zi * pr
        dr[0] = N * pr - (yr * qr - yi * qi)
        di[0] = N * pi - (yr * qi + yi * qr)


def aberth(coeffs, init, double tol, int max_iter):
    """Aberth-Ehrlich iteration (Gauss-Seidel sweep) on ascending coefficients."""
    c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef const double[::1] cr = np.ascontiguousarray(c.real)
    cdef const double[::1] ci = np.ascontiguousarray(c.imag)
    cdef Py_ssize_t N = c.shape[0] - 1
    z0 = np.array(init, dtype=np.complex128)
    cdef double[::1] xr = np.ascontiguousarray(z0.real)
    cdef double[::1] xi = np.ascontiguousarray(z0.imag)
    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef bint done = False
    cdef double nr, ni, dr, di, sr, si, ar, ai, m2, rr, ri, wr, wi, er, ei, step
    with nogil:
        while it < max_iter and not done:
            it += 1
            done = True
            for i in range(N):
                _ratio(cr, ci, N, xr[i], xi[i], &nr, &ni, &dr, &di)
                if nr == 0.0 and ni == 0.0:
                    continue
                sr = 0.0; si = 0.0
                for j in range(N):
                    if j != i:
                        ar = xr[i] - xr[j]
                        ai = xi[i] - xi[j]
                        m2 = ar * ar + ai * ai
                        if m2 > 0.0:
                            sr = sr + ar / m2
                            si = si - ai / m2
                if dr == 0.0 and di == 0.0:
                    wr = 1e-3 * (1.0 + hypot(xr[i], xi[i])); wi = 0.0
                else:
                    m2 = dr * dr + di * di
                    rr = (nr * dr + ni * di) / m2          # ratio = num / den
                    ri = (ni * dr - nr * di) / m2
                    er = 1.0 - (rr * sr - ri * si)          # 1 - ratio * s
                    ei = -(rr * si + ri * sr)
                    m2 = er * er + ei * ei
                    wr = (rr * er + ri * ei) / m2
                    wi = (ri * er - rr * ei) / m2
                xr[i] = xr[i] - wr
                xi[i] = xi[i] - wi
                step = hypot(wr, wi)
                if not (step <= tol * (1.0 + hypot(xr[i], xi[i]))):
                    done = False
    return np.asarray(xr) + 1j * np.asarray(xi), it, bool(done)


cdef void _horner_block(const double* cr, const double* ci, Py_ssize_t N, bint forward,
                        const double* ur, const double* ui, Py_ssize_t count,
                        double* pr, double* pi) noexcept nogil:
    # coefficient-outer / point-inner so the inner loop vectorizes; coefficients run
    # top-down (forward) or bottom-up (reversed polynomial)
    cdef Py_ssize_t i, k, kk
    cdef double t, cre, cim
    kk = N if forward else 0
    for i in range(count):
        pr[i] = cr[kk]
        pi[i] = ci[kk]
    for k in range(1, N + 1):
        kk = N - k if forward else k
        cre = cr[kk]
        cim = ci[kk]
        for i in range(count):
            t = pr[i] * ur[i] - pi[i] * ui[i] + cre
            pi[i] = pr[i] * ui[i] + pi[i] * ur[i] + cim
            pr[i] = t


def poly_logabs(coeffs, points):
    """``log |p(z)|`` for ascending coefficients without overflow for large ``|z|``."""
    c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z = np.ascontiguousarray(points, dtype=np.complex128).reshape(-1)
    cdef Py_ssize_t N = c.shape[0] - 1
    # map every point to a variable of modulus <= 1 and pick the matching coefficient order
    r = np.abs(z)
    inside = r <= 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        y = np.where(inside, z, 1.0 / z)
        ext = np.where(inside, 0.0, N * np.log(r))
    cdef const double[::1] cr = np.ascontiguousarray(c.real)
    cdef const double[::1] ci = np.ascontiguousarray(c.imag)
    out = np.empty(z.shape[0])
    cdef double[::1] pr, pi
    cdef const double[::1] ur, ui
    cdef Py_ssize_t m
    cdef bint fwd
    for sel, forward in ((inside, True), (~inside, False)):
        ys = y[sel]
        m = ys.shape[0]
        if m == 0:
            continue
        ur = np.ascontiguousarray(ys.real)
        ui = np.ascontiguousarray(ys.imag)
        pr = np.empty(m)
        pi = np.empty(m)
        fwd = forward
        with nogil:
            _horner_block(&cr[0], &ci[0], N, fwd, &ur[0], &ui[0], m, &pr[0], &pi[0])
        with np.errstate(divide="ignore"):
            out[sel] = np.log(np.hypot(np.asarray(pr), np.asarray(pi))) + ext[sel]
    return out.reshape(np.shape(points))

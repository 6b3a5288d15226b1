# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Gaussian generation and Householder QR.

Mirrors ``brp._fallback`` operation for operation.  The Gaussian generator
is bit-identical to the fallback; constants are imported from there so the
generator has a single definition.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport frexp, sqrt, floor
from libc.stdint cimport uint64_t

from brp import _fallback as _ref

cnp.import_array()

cdef uint64_t GAMMA = _ref.GAMMA
cdef uint64_t MIX1 = _ref.MIX1
cdef uint64_t MIX2 = _ref.MIX2
cdef double TWO_M53 = _ref.TWO_M53
cdef double LN2 = _ref.LN2
cdef double SQRT_HALF = _ref.SQRT_HALF
cdef double HALF_PI = _ref.HALF_PI

cdef double[12] LOG_C
cdef double[13] SIN_C
cdef double[14] COS_C
for _i in range(12):
    LOG_C[_i] = _ref.LOG_COEFFS[_i]
for _i in range(13):
    SIN_C[_i] = _ref.SIN_COEFFS[_i]
for _i in range(14):
    COS_C[_i] = _ref.COS_COEFFS[_i]


cdef inline uint64_t _mix(uint64_t z) nogil:
    z ^= z >> 30
    z *= MIX1
    z ^= z >> 27
    z *= MIX2
    z ^= z >> 31
    return z


cdef inline double _horner(const double* c, int n, double z) nogil:
    cdef double acc = c[n - 1]
    cdef int k
    for k in range(n - 2, -1, -1):
        acc = acc * z + c[k]
    return acc


cdef inline double _log_unit(double u) nogil:
    cdef int e
    cdef double m = frexp(u, &e)
    if m < SQRT_HALF:
        m = m * 2.0
        e = e - 1
    cdef double s = (m - 1.0) / (m + 1.0)
    cdef double z = s * s
    return (<double>e) * LN2 + 2.0 * s * _horner(LOG_C, 12, z)


def splitmix_draws(seed, Py_ssize_t count):
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out = np.empty(count, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            o[i] = _mix(s + <uint64_t>(i + 1) * GAMMA)
    return out


def standard_normals(seed, Py_ssize_t count):
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t pairs = (count + 1) // 2
    out = np.empty(2 * pairs, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t j
    cdef uint64_t d1, d2
    cdef double u1, u2, radius, t, quad, a, z, sn, cs
    cdef int qi
    with nogil:
        for j in range(pairs):
            d1 = _mix(s + <uint64_t>(2 * j + 1) * GAMMA) >> 11
            d2 = _mix(s + <uint64_t>(2 * j + 2) * GAMMA) >> 11
            u1 = (<double>(d1 + 1)) * TWO_M53
            u2 = (<double>d2) * TWO_M53
            radius = sqrt(-2.0 * _log_unit(u1))
            t = u2 * 4.0
            quad = floor(t)
            a = (t - quad) * HALF_PI
            z = a * a
            sn = a * _horner(SIN_C, 13, z)
            cs = _horner(COS_C, 14, z)
            qi = <int>quad
            if qi == 0:
                o[2 * j] = radius * cs
                o[2 * j + 1] = radius * sn
            elif qi == 1:
                o[2 * j] = radius * (-sn)
                o[2 * j + 1] = radius * cs
            elif qi == 2:
                o[2 * j] = radius * (-cs)
                o[2 * j + 1] = radius * (-sn)
            else:
                o[2 * j] = radius * sn
                o[2 * j + 1] = radius * (-cs)
    return out[:count]


def householder_qr(a):
    """Thin Householder QR, nonnegative diagonal of ``r``; see the fallback."""
    cdef double[:, ::1] r = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t m = r.shape[0], n = r.shape[1]
    vbuf = np.zeros((n, m), dtype=np.float64)
    betas = np.zeros(n, dtype=np.float64)
    qarr = np.zeros((m, n), dtype=np.float64)
    work = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] V = vbuf
    cdef double[::1] beta = betas
    cdef double[:, ::1] q = qarr
    cdef double[::1] w = work
    cdef Py_ssize_t i, j, c
    cdef double norm, vv, b, vi
    with nogil:
        for j in range(n):
            norm = 0.0
            for i in range(j, m):
                norm = norm + r[i, j] * r[i, j]
            norm = sqrt(norm)
            if norm == 0.0:
                beta[j] = 0.0
                continue
            for i in range(j, m):
                V[j, i] = r[i, j]
            if V[j, j] >= 0.0:
                V[j, j] = V[j, j] + norm
            else:
                V[j, j] = V[j, j] - norm
            vv = 0.0
            for i in range(j, m):
                vv = vv + V[j, i] * V[j, i]
            b = 2.0 / vv
            beta[j] = b
            for c in range(j, n):
                w[c] = 0.0
            for i in range(j, m):
                vi = V[j, i]
                for c in range(j, n):
                    w[c] = w[c] + vi * r[i, c]
            for i in range(j, m):
                vi = b * V[j, i]
                for c in range(j, n):
                    r[i, c] = r[i, c] - vi * w[c]
        for i in range(n):
            q[i, i] = 1.0
        for j in range(n - 1, -1, -1):
            b = beta[j]
            if b == 0.0:
                continue
            for c in range(j, n):
                w[c] = 0.0
            for i in range(j, m):
                vi = V[j, i]
                for c in range(j, n):
                    w[c] = w[c] + vi * q[i, c]
            for i in range(j, m):
                vi = b * V[j, i]
                for c in range(j, n):
                    q[i, c] = q[i, c] - vi * w[c]
        for i in range(n):
            for c in range(i):
                r[i, c] = 0.0
        for c in range(n):
            if r[c, c] < 0.0:
                for i in range(c, n):
                    r[c, i] = -r[c, i]
                for i in range(m):
                    q[i, c] = -q[i, c]
    rarr = np.asarray(r)[:n, :].copy()
    return qarr, rarr

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors _fallback.py function by function. The random-stream functions must
stay bitwise-identical to the fallback: keep every floating-point expression
in the same shape, keep the in-package _det_log (no libm log), and build with
-ffp-contract=off (see setup.py).
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint32_t, uint64_t
from libc.math cimport frexp, sqrt

cnp.import_array()

cdef uint64_t PHILOX_M0 = 0xD2511F53u
cdef uint64_t PHILOX_M1 = 0xCD9E8D57u
cdef uint32_t PHILOX_W0 = 0x9E3779B9u
cdef uint32_t PHILOX_W1 = 0xBB67AE85u

cdef double U64_TO_UNIT = 2.0 ** -53
cdef double LN2 = 0.6931471805599453

cdef int N_ATANH = 20
cdef double[20] ATANH_COEFFS
for _k in range(20):
    ATANH_COEFFS[_k] = 1.0 / (2 * _k + 1)

cdef double A0 = -3.969683028665376e+01
cdef double A1 = 2.209460984245205e+02
cdef double A2 = -2.759285104469687e+02
cdef double A3 = 1.383577518672690e+02
cdef double A4 = -3.066479806614716e+01
cdef double A5 = 2.506628277459239e+00
cdef double B0 = -5.447609879822406e+01
cdef double B1 = 1.615858368580409e+02
cdef double B2 = -1.556989798598866e+02
cdef double B3 = 6.680131188771972e+01
cdef double B4 = -1.328068155288572e+01
cdef double C0 = -7.784894002430293e-03
cdef double C1 = -3.223964580411365e-01
cdef double C2 = -2.400758277161838e+00
cdef double C3 = -2.549732539343734e+00
cdef double C4 = 4.374664141464968e+00
cdef double C5 = 2.938163982698783e+00
cdef double D0 = 7.784695709041462e-03
cdef double D1 = 3.224671290700398e-01
cdef double D2 = 2.445134137142996e+00
cdef double D3 = 3.754408661907416e+00
cdef double ACKLAM_PLOW = 0.02425


cdef inline void philox_block(uint64_t seed, uint64_t stream, uint64_t n,
                              uint64_t* w0, uint64_t* w1) nogil:
    cdef uint32_t c0 = <uint32_t> n
    cdef uint32_t c1 = <uint32_t> (n >> 32)
    cdef uint32_t c2 = <uint32_t> stream
    cdef uint32_t c3 = <uint32_t> (stream >> 32)
    cdef uint32_t k0 = <uint32_t> seed
    cdef uint32_t k1 = <uint32_t> (seed >> 32)
    cdef uint64_t p0, p1
    cdef uint32_t hi0, lo0, hi1, lo1
    cdef int r
    for r in range(10):
        p0 = PHILOX_M0 * c0
        p1 = PHILOX_M1 * c2
        hi0 = <uint32_t> (p0 >> 32)
        lo0 = <uint32_t> p0
        hi1 = <uint32_t> (p1 >> 32)
        lo1 = <uint32_t> p1
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 = k0 + PHILOX_W0
        k1 = k1 + PHILOX_W1
    w0[0] = (<uint64_t> c0) | ((<uint64_t> c1) << 32)
    w1[0] = (<uint64_t> c2) | ((<uint64_t> c3) << 32)


cdef inline double det_log(double x) nogil:
    cdef int e
    cdef double f = frexp(x, &e)
    cdef double z = (f - 1.0) / (f + 1.0)
    cdef double z2 = z * z
    cdef double p = ATANH_COEFFS[N_ATANH - 1]
    cdef int k
    for k in range(N_ATANH - 2, -1, -1):
        p = p * z2 + ATANH_COEFFS[k]
    return e * LN2 + 2.0 * z * p


cdef inline double acklam_tail(double q) nogil:
    cdef double num = ((((C0 * q + C1) * q + C2) * q + C3) * q + C4) * q + C5
    cdef double den = (((D0 * q + D1) * q + D2) * q + D3) * q + 1.0
    return num / den


cdef inline double acklam_central(double p) nogil:
    cdef double q = p - 0.5
    cdef double r = q * q
    cdef double num = ((((A0 * r + A1) * r + A2) * r + A3) * r + A4) * r + A5
    cdef double den = ((((B0 * r + B1) * r + B2) * r + B3) * r + B4) * r + 1.0
    return num * q / den


cdef inline double inv_normal_cdf(double p) nogil:
    cdef double q
    if p < ACKLAM_PLOW:
        q = sqrt(-2.0 * det_log(p))
        return acklam_tail(q)
    elif p > 1.0 - ACKLAM_PLOW:
        q = sqrt(-2.0 * det_log(1.0 - p))
        return -acklam_tail(q)
    return acklam_central(p)


def block_words(seed, stream, block):
    """The two 64-bit words of one Philox block (test probe)."""
    cdef uint64_t w0 = 0, w1 = 0
    philox_block(int(seed) & 0xFFFFFFFFFFFFFFFF,
                 int(stream) & 0xFFFFFFFFFFFFFFFF,
                 int(block) & 0xFFFFFFFFFFFFFFFF, &w0, &w1)
    return int(w0), int(w1)


def uint64_stream(seed, stream, start, count):
    """Draws [start, start+count) of the keyed 64-bit Philox stream."""
    cdef Py_ssize_t n = count
    out = np.empty(n, dtype=np.uint64)
    if n == 0:
        return out
    cdef uint64_t[::1] ov = out
    cdef uint64_t sd = int(seed) & 0xFFFFFFFFFFFFFFFF
    cdef uint64_t st = int(stream) & 0xFFFFFFFFFFFFFFFF
    cdef uint64_t first = int(start) & 0xFFFFFFFFFFFFFFFF
    cdef uint64_t w0 = 0, w1 = 0
    cdef uint64_t block
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            block = (first + i) >> 1
            if i == 0 or ((first + i) & 1) == 0:
                philox_block(sd, st, block, &w0, &w1)
            ov[i] = w1 if ((first + i) & 1) else w0
    return out


def uniform_stream(seed, stream, start, count):
    """Uniforms in the open interval (0,1), one per 64-bit draw."""
    x = uint64_stream(seed, stream, start, count)
    cdef uint64_t[::1] xv = x
    out = np.empty(x.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = ((<double> (xv[i] >> 11)) + 0.5) * U64_TO_UNIT
    return out


def normal_stream(seed, stream, start, count):
    """Standard normals via the inverse CDF of the uniform stream."""
    p = uniform_stream(seed, stream, start, count)
    cdef double[::1] pv = p
    out = np.empty(p.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(pv.shape[0]):
            ov[i] = inv_normal_cdf(pv[i])
    return out


def color_pixels(z, chol_lower, mean):
    """Pixels mean + L·z_i from standard normals, fixed accumulation order."""
    cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[:, ::1] cv = np.ascontiguousarray(chol_lower, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(mean, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0], nb = zv.shape[1]
    out = np.empty((n, nb), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, a, b
    cdef double acc
    with nogil:
        for i in range(n):
            for a in range(nb):
                acc = mv[a]
                for b in range(a + 1):
                    acc = acc + cv[a, b] * zv[i, b]
                ov[i, a] = acc
    return out


def accumulate_moments(x):
    """Mean, covariance and raw correlation with divisor N.

    Two passes in strict pixel order; lower triangle accumulated then
    mirrored, so the result is exactly symmetric.
    """
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], nb = xv.shape[1]
    m = np.zeros(nb, dtype=np.float64)
    k = np.zeros((nb, nb), dtype=np.float64)
    r = np.zeros((nb, nb), dtype=np.float64)
    cdef double[::1] mv = m
    cdef double[:, ::1] kv = k
    cdef double[:, ::1] rv = r
    cdef Py_ssize_t i, a, b
    cdef double xa, ca
    with nogil:
        for i in range(n):
            for a in range(nb):
                mv[a] += xv[i, a]
        for a in range(nb):
            mv[a] /= n
        for i in range(n):
            for a in range(nb):
                xa = xv[i, a]
                ca = xa - mv[a]
                for b in range(a + 1):
                    rv[a, b] += xa * xv[i, b]
                    kv[a, b] += ca * (xv[i, b] - mv[b])
        for a in range(nb):
            for b in range(a + 1):
                rv[a, b] /= n
                kv[a, b] /= n
                rv[b, a] = rv[a, b]
                kv[b, a] = kv[a, b]
    return m, k, r


def detection_scores(x, w, origin):
    """Filter outputs w·(r_i - origin) for every pixel."""
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(origin, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], nb = xv.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, a
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for a in range(nb):
                acc += wv[a] * (xv[i, a] - gv[a])
            ov[i] = acc
    return out

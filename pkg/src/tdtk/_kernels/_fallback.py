"""numpy implementations of the hot kernels.

Selected when the compiled extension is unavailable (or disabled via the
TDTK_DISABLE_NATIVE environment variable). The random-stream functions are
bitwise-identical to the compiled ones: every floating-point expression is
written with the same operation order, and the tail logarithm is computed
in-package (fixed-order frexp + atanh series) instead of through libm/SIMD
log, whose last-ulp behaviour differs between implementations.

Stream layout: Philox4x32-10 keyed by the 64-bit seed, counter block
(n_lo, n_hi, stream_lo, stream_hi) for block index n. Each block yields four
32-bit words x0..x3, packed into two 64-bit draws (x0|x1<<32, x2|x3<<32);
draw i lives in block i>>1, word i&1, so any subrange can be regenerated
without replaying the stream. A draw becomes a uniform in (0,1) via
((x >> 11) + 0.5) * 2**-53 and a standard normal via Acklam's inverse
normal CDF (relative error < 1.15e-9, plenty below sampling noise).
"""

import numpy as np

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF

_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = 0x9E3779B9
_PHILOX_W1 = 0xBB67AE85

_U64_TO_UNIT = 2.0 ** -53
_LN2 = 0.6931471805599453

# 1/(2k+1) for the atanh series; 20 terms cover |z| <= 1/3 to < 1e-21.
_ATANH_COEFFS = tuple(1.0 / (2 * k + 1) for k in range(20))

# Acklam's inverse-normal-CDF coefficients.
_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02,
             -2.759285104469687e+02, 1.383577518672690e+02,
             -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02,
             -1.556989798598866e+02, 6.680131188771972e+01,
             -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01,
             -2.400758277161838e+00, -2.549732539343734e+00,
             4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01,
             2.445134137142996e+00, 3.754408661907416e+00)
_ACKLAM_PLOW = 0.02425


def _philox_blocks(seed, stream, block_start, nblocks):
    """Return the 2*nblocks uint64 draws of blocks [block_start, ...)."""
    seed = int(seed) & _MASK64
    stream = int(stream) & _MASK64
    idx = (int(block_start) & _MASK64) + np.arange(nblocks, dtype=np.uint64)
    c0 = (idx & np.uint64(_MASK32)).astype(np.uint32)
    c1 = (idx >> np.uint64(32)).astype(np.uint32)
    c2 = np.full(nblocks, stream & _MASK32, dtype=np.uint32)
    c3 = np.full(nblocks, stream >> 32, dtype=np.uint32)
    keys = [((seed + r * _PHILOX_W0) & _MASK32,
             ((seed >> 32) + r * _PHILOX_W1) & _MASK32) for r in range(10)]
    for k0, k1 in keys:
        p0 = c0.astype(np.uint64) * _PHILOX_M0
        p1 = c2.astype(np.uint64) * _PHILOX_M1
        hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
        lo0 = p0.astype(np.uint32)
        hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
        lo1 = p1.astype(np.uint32)
        c0 = hi1 ^ c1 ^ np.uint32(k0)
        c1 = lo1
        c2 = hi0 ^ c3 ^ np.uint32(k1)
        c3 = lo0
    out = np.empty(2 * nblocks, dtype=np.uint64)
    out[0::2] = c0.astype(np.uint64) | (c1.astype(np.uint64) << np.uint64(32))
    out[1::2] = c2.astype(np.uint64) | (c3.astype(np.uint64) << np.uint64(32))
    return out


def block_words(seed, stream, block):
    """The two 64-bit words of one Philox block (test probe)."""
    w = _philox_blocks(seed, stream, int(block) & _MASK64, 1)
    return int(w[0]), int(w[1])


def uint64_stream(seed, stream, start, count):
    """Draws [start, start+count) of the keyed 64-bit Philox stream."""
    count = int(count)
    if count == 0:
        return np.empty(0, dtype=np.uint64)
    start = int(start) & _MASK64
    first = start >> 1
    last = (start + count - 1) >> 1
    words = _philox_blocks(seed, stream, first, last - first + 1)
    off = start & 1
    return words[off:off + count].copy()


def uniform_stream(seed, stream, start, count):
    """Uniforms in the open interval (0,1), one per 64-bit draw."""
    x = uint64_stream(seed, stream, start, count)
    return ((x >> np.uint64(11)).astype(np.float64) + 0.5) * _U64_TO_UNIT


def _det_log(x):
    """Deterministic natural log: frexp + fixed-order atanh series."""
    f, e = np.frexp(x)
    z = (f - 1.0) / (f + 1.0)
    z2 = z * z
    p = np.full_like(z, _ATANH_COEFFS[-1])
    for k in range(len(_ATANH_COEFFS) - 2, -1, -1):
        p = p * z2 + _ATANH_COEFFS[k]
    return e * _LN2 + 2.0 * z * p


def _acklam_tail(q):
    c0, c1, c2, c3, c4, c5 = _ACKLAM_C
    d0, d1, d2, d3 = _ACKLAM_D
    num = ((((c0 * q + c1) * q + c2) * q + c3) * q + c4) * q + c5
    den = (((d0 * q + d1) * q + d2) * q + d3) * q + 1.0
    return num / den


def _acklam_central(p):
    a0, a1, a2, a3, a4, a5 = _ACKLAM_A
    b0, b1, b2, b3, b4 = _ACKLAM_B
    q = p - 0.5
    r = q * q
    num = ((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5
    den = ((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0
    return num * q / den


def normal_stream(seed, stream, start, count):
    """Standard normals via the inverse CDF of the uniform stream."""
    p = uniform_stream(seed, stream, start, count)
    out = np.empty_like(p)
    low = p < _ACKLAM_PLOW
    high = p > 1.0 - _ACKLAM_PLOW
    mid = ~(low | high)
    if low.any():
        q = np.sqrt(-2.0 * _det_log(p[low]))
        out[low] = _acklam_tail(q)
    if high.any():
        q = np.sqrt(-2.0 * _det_log(1.0 - p[high]))
        out[high] = -_acklam_tail(q)
    if mid.any():
        out[mid] = _acklam_central(p[mid])
    return out


def color_pixels(z, chol_lower, mean):
    """Pixels mean + L·z_i from standard normals, fixed accumulation order."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    chol_lower = np.asarray(chol_lower, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    n, nb = z.shape
    out = np.empty((n, nb), dtype=np.float64)
    for a in range(nb):
        acc = np.full(n, mean[a])
        for b in range(a + 1):
            acc += chol_lower[a, b] * z[:, b]
        out[:, a] = acc
    return out


def accumulate_moments(x):
    """Mean, covariance and raw correlation with divisor N (BLAS-backed)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    m = x.sum(axis=0) / n
    xc = x - m
    k = (xc.T @ xc) / n
    r = (x.T @ x) / n
    return m, k, r


def detection_scores(x, w, origin):
    """Filter outputs w·(r_i - origin) for every pixel."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    origin = np.asarray(origin, dtype=np.float64)
    return (x - origin) @ w

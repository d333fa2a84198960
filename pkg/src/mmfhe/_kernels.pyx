# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: word-size modular multiply, constant-geometry NTT
stages and the gadget inner product.

Residues are uint64 holding values below a prime q < 2^36.  The product of
two residues is reduced with a double-precision quotient estimate followed by
an exact correction in wrapping 64-bit arithmetic, so the 72-bit intermediate
never has to be materialised.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cnp.import_array()


cdef inline uint64_t _mulshoup(uint64_t x, uint64_t w, uint64_t wp, uint64_t q) noexcept nogil:
    # wp = floor(w * 2^64 / q); the estimate is off by at most one q
    cdef uint64_t qhat = <uint64_t>((<u128>x * wp) >> 64)
    cdef uint64_t r = x * w - qhat * q
    if r >= q:
        r -= q
    return r


cdef inline uint64_t _mulmod(uint64_t a, uint64_t b, uint64_t q, double qinv) noexcept nogil:
    cdef uint64_t qhat = <uint64_t>(<double>a * <double>b * qinv)
    cdef int64_t r = <int64_t>(a * b - qhat * q)
    if r < 0:
        r += <int64_t>q
    elif r >= <int64_t>q:
        r -= <int64_t>q
    return <uint64_t>r


def mulmod(a_arr, b_arr, uint64_t q):
    cdef const uint64_t[::1] a = a_arr.reshape(-1)
    cdef const uint64_t[::1] b = b_arr.reshape(-1)
    cdef Py_ssize_t n = a.shape[0], i
    out_arr = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] out = out_arr
    cdef double qinv = 1.0 / <double>q
    with nogil:
        for i in range(n):
            out[i] = _mulmod(a[i], b[i], q, qinv)
    return out_arr.reshape(a_arr.shape)


def ntt_forward(const uint64_t[:, ::1] x, pre, pre_sh, const uint64_t[:, ::1] tw, const uint64_t[:, ::1] tw_sh,
                const cnp.int64_t[::1] perm, uint64_t q):
    """Rows of x through an optional pre-twist, log n Pease DIF stages and
    the output permutation."""
    cdef Py_ssize_t rows = x.shape[0], n = x.shape[1]
    cdef Py_ssize_t half = n // 2, stages = tw.shape[0]
    cdef Py_ssize_t r, s, j
    cdef uint64_t a, b, t
    cdef bint twist = pre is not None
    cdef const uint64_t[::1] pv
    cdef const uint64_t[::1] pvs
    if twist:
        pv = pre
        pvs = pre_sh
    out_arr = np.empty((rows, n), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    buf_arr = np.empty((2, n), dtype=np.uint64)
    cdef uint64_t[:, ::1] buf = buf_arr
    cdef uint64_t *src
    cdef uint64_t *dst
    cdef uint64_t *tmp
    cdef const uint64_t *w
    cdef const uint64_t *wp
    with nogil:
        for r in range(rows):
            src = &buf[0, 0]
            dst = &buf[1, 0]
            if twist:
                for j in range(n):
                    src[j] = _mulshoup(x[r, j], pv[j], pvs[j], q)
            else:
                for j in range(n):
                    src[j] = x[r, j]
            for s in range(stages):
                w = &tw[s, 0]
                wp = &tw_sh[s, 0]
                for j in range(half):
                    a = src[j]
                    b = src[j + half]
                    t = a + b
                    if t >= q:
                        t -= q
                    dst[2 * j] = t
                    t = a + q - b
                    if t >= q:
                        t -= q
                    dst[2 * j + 1] = _mulshoup(t, w[j], wp[j], q)
                tmp = src
                src = dst
                dst = tmp
            for j in range(n):
                out[r, j] = src[perm[j]]
    return out_arr


def ntt_inverse(const uint64_t[:, ::1] x, const uint64_t[:, ::1] itw, const uint64_t[:, ::1] itw_sh,
                const cnp.int64_t[::1] perm, post, post_sh, uint64_t q):
    """Exact inverse of ntt_forward's stages; post carries the untwist and
    the 1/n factor."""
    cdef Py_ssize_t rows = x.shape[0], n = x.shape[1]
    cdef Py_ssize_t half = n // 2, stages = itw.shape[0]
    cdef Py_ssize_t r, s, j
    cdef uint64_t u, v, t
    cdef bint scale = post is not None
    cdef const uint64_t[::1] pv
    cdef const uint64_t[::1] pvs
    if scale:
        pv = post
        pvs = post_sh
    out_arr = np.empty((rows, n), dtype=np.uint64)
    cdef uint64_t[:, ::1] out = out_arr
    buf_arr = np.empty((2, n), dtype=np.uint64)
    cdef uint64_t[:, ::1] buf = buf_arr
    cdef uint64_t *src
    cdef uint64_t *dst
    cdef uint64_t *tmp
    cdef const uint64_t *w
    cdef const uint64_t *wp
    with nogil:
        for r in range(rows):
            src = &buf[0, 0]
            dst = &buf[1, 0]
            for j in range(n):
                src[j] = x[r, perm[j]]
            for s in range(stages - 1, -1, -1):
                w = &itw[s, 0]
                wp = &itw_sh[s, 0]
                for j in range(half):
                    u = src[2 * j]
                    v = _mulshoup(src[2 * j + 1], w[j], wp[j], q)
                    t = u + v
                    if t >= q:
                        t -= q
                    dst[j] = t
                    t = u + q - v
                    if t >= q:
                        t -= q
                    dst[j + half] = t
                tmp = src
                src = dst
                dst = tmp
            if scale:
                for j in range(n):
                    out[r, j] = _mulshoup(src[j], pv[j], pvs[j], q)
            else:
                for j in range(n):
                    out[r, j] = src[j]
    return out_arr


def gadget_mac(const uint64_t[:, :, ::1] d, const uint64_t[:, :, ::1] key, uint64_t q):
    """out[b, c] = sum_r d[b, r] * key[r, c] (mod q), all in evaluation rep."""
    cdef Py_ssize_t batch = d.shape[0], rows = d.shape[1], n = d.shape[2]
    cdef Py_ssize_t cols = key.shape[1]
    cdef Py_ssize_t b, r, c, j
    cdef uint64_t t
    cdef double qinv = 1.0 / <double>q
    out_arr = np.zeros((batch, cols, n), dtype=np.uint64)
    cdef uint64_t[:, :, ::1] out = out_arr
    with nogil:
        for b in range(batch):
            for r in range(rows):
                for c in range(cols):
                    for j in range(n):
                        t = out[b, c, j] + _mulmod(d[b, r, j], key[r, c, j], q, qinv)
                        if t >= q:
                            t -= q
                        out[b, c, j] = t
    return out_arr


def decompose_rows(const uint64_t[:, :, ::1] x, rot, uint64_t q, int levels, int log_base, int64_t scale):
    """Signed gadget digits of each polynomial x[b, c] (or of
    x[b, c] * X^rot[b] - x[b, c] when rot is given), as residues.

    Output shape (B, C*levels, N), row c*levels + j, digit 0 most significant.
    """
    cdef Py_ssize_t batch = x.shape[0], comps = x.shape[1], n = x.shape[2]
    cdef Py_ssize_t b, c, j, lv, src, row
    cdef bint rotate = rot is not None
    cdef cnp.int64_t[::1] rv
    if rotate:
        rv = rot
    cdef int64_t two_n = 2 * n, r, xc, y, d, half_q = <int64_t>(q // 2), iq = <int64_t>q
    cdef int64_t base = 1 << log_base, half = base >> 1, mask = base - 1
    cdef uint64_t v, w
    # floor((2*xc + scale) / (2*scale)) without a hardware divide: shift the
    # numerator positive, estimate with a double reciprocal, fix by one step
    cdef int64_t den = 2 * scale, shift = (iq // den) + 1, t, rem
    cdef double inv_den = 1.0 / <double>den
    ybuf_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] ybuf = ybuf_arr
    out_arr = np.empty((batch, comps * levels, n), dtype=np.uint64)
    cdef uint64_t[:, :, ::1] out = out_arr
    with nogil:
        for b in range(batch):
            r = 0
            if rotate:
                r = rv[b] % two_n
                if r < 0:
                    r += two_n
            for c in range(comps):
                for j in range(n):
                    v = x[b, c, j]
                    if rotate:
                        src = j - r
                        if src < 0:
                            src += two_n
                        if src < n:
                            w = x[b, c, src]
                        else:
                            w = x[b, c, src - n]
                            if w != 0:
                                w = q - w
                        v = w + q - v
                        if v >= q:
                            v -= q
                    xc = <int64_t>v
                    if xc > half_q:
                        xc -= iq
                    t = 2 * xc + scale + shift * den
                    y = <int64_t>(<double>t * inv_den)
                    rem = t - y * den
                    if rem < 0:
                        y -= 1
                    elif rem >= den:
                        y += 1
                    ybuf[j] = y - shift
                row = c * levels
                for lv in range(levels - 1, 0, -1):
                    for j in range(n):
                        y = ybuf[j]
                        d = ((y + half) & mask) - half
                        out[b, row + lv, j] = <uint64_t>(d + (iq & (d >> 63)))
                        ybuf[j] = (y - d) >> log_base
                for j in range(n):
                    y = ybuf[j]
                    out[b, row, j] = <uint64_t>(y + (iq & (y >> 63)))
    return out_arr

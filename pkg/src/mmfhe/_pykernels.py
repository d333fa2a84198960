"""Numpy implementations of the hot loops, used when the compiled module is
unavailable or MMFHE_PURE=1 is set.  Same signatures and results as
``mmfhe._kernels``.
"""
import numpy as np


def mulmod(a, b, q):
    q = np.uint64(q)
    qhat = (a.astype(np.float64) * b.astype(np.float64) * (1.0 / float(q))).astype(np.uint64)
    r = (a * b - qhat * q).view(np.int64)
    r = np.where(r < 0, r + np.int64(q), r)
    r = np.where(r >= np.int64(q), r - np.int64(q), r)
    return r.astype(np.uint64)


def _addmod(a, b, q):
    t = a + b
    return np.where(t >= q, t - q, t)


def _submod(a, b, q):
    t = a + (q - b)
    return np.where(t >= q, t - q, t)


def ntt_forward(x, pre, pre_sh, tw, tw_sh, perm, q):
    # the Shoup companions (*_sh) only speed up the compiled path
    qq = np.uint64(q)
    y = np.array(x, dtype=np.uint64, copy=True)
    if pre is not None:
        y = mulmod(y, np.broadcast_to(pre, y.shape), q)
    rows, n = y.shape
    half = n // 2
    for s in range(tw.shape[0]):
        a = y[:, :half]
        b = y[:, half:]
        z = np.empty_like(y)
        z[:, 0::2] = _addmod(a, b, qq)
        z[:, 1::2] = mulmod(_submod(a, b, qq), np.broadcast_to(tw[s], a.shape), q)
        y = z
    return np.ascontiguousarray(y[:, perm])


def ntt_inverse(x, itw, itw_sh, perm, post, post_sh, q):
    qq = np.uint64(q)
    y = np.ascontiguousarray(x[:, perm])
    rows, n = y.shape
    half = n // 2
    for s in range(itw.shape[0] - 1, -1, -1):
        u = y[:, 0::2]
        v = mulmod(np.ascontiguousarray(y[:, 1::2]), np.broadcast_to(itw[s], (rows, half)), q)
        z = np.empty_like(y)
        z[:, :half] = _addmod(u, v, qq)
        z[:, half:] = _submod(u, v, qq)
        y = z
    if post is not None:
        y = mulmod(y, np.broadcast_to(post, y.shape), q)
    return y


def gadget_mac(d, key, q):
    qq = np.uint64(q)
    batch, rows, n = d.shape
    cols = key.shape[1]
    out = np.zeros((batch, cols, n), dtype=np.uint64)
    for r in range(rows):
        for c in range(cols):
            out[:, c] = _addmod(out[:, c], mulmod(d[:, r], np.broadcast_to(key[r, c], (batch, n)), q), qq)
    return out


def decompose_rows(x, rot, q, levels, log_base, scale):
    batch, comps, n = x.shape
    if rot is not None:
        idx = (np.arange(n)[None, :] - rot[:, None]) % (2 * n)
        wrap = idx >= n
        g = np.take_along_axis(x, np.broadcast_to((idx % n)[:, None, :], x.shape), axis=2)
        g = np.where(wrap[:, None, :] & (g != 0), np.uint64(q) - g, g)
        x = _submod(g, x, np.uint64(q))
    xc = x.astype(np.int64)
    xc = np.where(xc > q // 2, xc - q, xc)
    y = np.floor_divide(2 * xc + scale, 2 * scale)
    base = 1 << log_base
    half = base >> 1
    out = np.empty((batch, comps, levels, n), dtype=np.int64)
    for j in range(levels - 1, 0, -1):
        d = ((y + half) & (base - 1)) - half
        out[:, :, j] = d
        y = (y - d) >> log_base
    out[:, :, 0] = y
    out = np.where(out < 0, out + q, out).astype(np.uint64)
    return out.reshape(batch, comps * levels, n)

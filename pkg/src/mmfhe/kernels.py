"""Backend selection for the hot loops plus the kernel-call counter.

The compiled extension is preferred; set ``MMFHE_PURE=1`` to force the numpy
fallback.  Every public helper here records one call of its kernel class in
the active :class:`KernelCounter`, which is how scheme code proves it only
uses the six primitive kernels (NTT, BConv, IP, ModMul, ModAdd, Auto).
"""
from __future__ import annotations

import contextlib
import os
from collections import Counter

import numpy as np

from . import _pykernels

_backend = _pykernels
BACKEND = "python"
if os.environ.get("MMFHE_PURE") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build
        _compiled = None
    if _compiled is not None:
        _backend = _compiled
        BACKEND = "cython"

KERNEL_KINDS = ("NTT", "iNTT", "BConv", "IP", "ModMul", "ModAdd", "Auto")

_counters: list[Counter] = []
_quiet = 0


def record(kind: str, n: int = 1) -> None:
    if _quiet:
        return
    for c in _counters:
        c[kind] += n


@contextlib.contextmanager
def kernel_scope(kind: str, n: int = 1):
    """Count the block as one call of `kind`, hiding the helpers it uses."""
    global _quiet
    record(kind, n)
    _quiet += 1
    try:
        yield
    finally:
        _quiet -= 1


@contextlib.contextmanager
def count_kernels():
    """Collect kernel calls made inside the block into a Counter."""
    c: Counter = Counter()
    _counters.append(c)
    try:
        yield c
    finally:
        _counters.remove(c)


def use_backend(name: str):
    """Switch backend at runtime ("cython" or "python"); returns the old name."""
    global _backend, BACKEND
    old = BACKEND
    if name == "python":
        _backend, BACKEND = _pykernels, "python"
    elif name == "cython":
        from . import _kernels
        _backend, BACKEND = _kernels, "cython"
    else:
        raise ValueError(f"unknown backend {name!r}")
    return old


def _u64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.uint64)


def mulmod(a, b, q: int) -> np.ndarray:
    record("ModMul")
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
    return _backend.mulmod(_u64(a), _u64(b), q)


def addmod(a, b, q: int) -> np.ndarray:
    record("ModAdd")
    q = np.uint64(q)
    t = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(t >= q, t - q, t)


def submod(a, b, q: int) -> np.ndarray:
    record("ModAdd")
    q = np.uint64(q)
    t = np.asarray(a, dtype=np.uint64) + (q - np.asarray(b, dtype=np.uint64))
    return np.where(t >= q, t - q, t)


def negmod(a, q: int) -> np.ndarray:
    record("ModAdd")
    a = np.asarray(a, dtype=np.uint64)
    return np.where(a == 0, a, np.uint64(q) - a)


def shoup(w, q: int) -> np.ndarray:
    """floor(w * 2^64 / q) for residues w < q < 2^36, in wrapping uint64."""
    w = np.asarray(w, dtype=np.uint64)
    t, r0 = divmod(1 << 64, q)
    if t >= 1 << 64:  # only q = 1
        raise ValueError("modulus too small")
    # floor(w * r0 / q) with w, r0 < 2^36: float estimate, exact correction
    est = np.floor(w.astype(np.float64) * (float(r0) / q)).astype(np.uint64)
    rem = (w * np.uint64(r0) - est * np.uint64(q)).view(np.int64)
    est = np.where(rem < 0, est - np.uint64(1), est)
    rem = np.where(rem < 0, rem + q, rem)
    est = np.where(rem >= q, est + np.uint64(1), est)
    return w * np.uint64(t) + est


def ntt_rows(x, pre, pre_sh, tw, tw_sh, perm, q: int) -> np.ndarray:
    """Forward transform of every row of a 2-D array (one modulus)."""
    x = _u64(x)
    record("NTT", x.shape[0])
    return _backend.ntt_forward(x, pre, pre_sh, tw, tw_sh, perm, q)


def intt_rows(x, itw, itw_sh, perm, post, post_sh, q: int) -> np.ndarray:
    x = _u64(x)
    record("iNTT", x.shape[0])
    return _backend.ntt_inverse(x, itw, itw_sh, perm, post, post_sh, q)


def decompose_rows(x, rot, q: int, levels: int, log_base: int, scale: int) -> np.ndarray:
    """Signed gadget digits (as residues) of every polynomial in a
    (B, C, N) array, optionally of x*X^rot[b] - x instead.  Output is
    (B, C*levels, N) with the most significant digit first."""
    r = None if rot is None else np.ascontiguousarray(rot, dtype=np.int64)
    return _backend.decompose_rows(_u64(x), r, q, levels, log_base, scale)


def gadget_mac(d, key, q: int, kind: str = "IP") -> np.ndarray:
    """Batched vector-matrix product of digit polynomials with a key matrix."""
    record(kind)
    return _backend.gadget_mac(_u64(d), _u64(key), q)

"""Canonical-embedding encoder.

Slot k holds m(zeta^(5^k)) with zeta = exp(i*pi/N); the conjugate slots at
-5^k are filled implicitly so the coefficient vector is real.  Evaluation at
all odd powers of zeta is one length-N FFT after a zeta^j twist.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import SlotOverflow
from ..modmath import RnsBasis
from ..polyring import Rep
from .params import CkksParams
from .rns import RnsPolynomial


@lru_cache(maxsize=16)
def _slot_index(n: int) -> np.ndarray:
    """Position t (with odd exponent 2t+1) of each slot's evaluation point."""
    e = np.array([pow(5, k, 2 * n) for k in range(n // 2)], dtype=np.int64)
    return (e - 1) // 2


@lru_cache(maxsize=16)
def _zeta_powers(n: int) -> np.ndarray:
    return np.exp(1j * np.pi * np.arange(n) / n)


def embed_inverse(values, n: int) -> np.ndarray:
    """Real coefficient vector whose canonical embedding is `values`."""
    z = np.zeros(n // 2, dtype=np.complex128)
    v = np.asarray(values, dtype=np.complex128).reshape(-1)
    if v.size > n // 2:
        raise SlotOverflow(f"{v.size} values exceed {n // 2} slots")
    z[: v.size] = v
    t = _slot_index(n)
    full = np.zeros(n, dtype=np.complex128)
    full[t] = z
    full[n - 1 - t] = np.conj(z)  # exponent -(2t+1) = 2(n-1-t)+1 mod 2n
    coeffs = np.fft.fft(full) / n * np.conj(_zeta_powers(n))
    return coeffs.real


def embed(coeffs, n: int) -> np.ndarray:
    vals = np.fft.ifft(np.asarray(coeffs, dtype=np.float64) * _zeta_powers(n)) * n
    return vals[_slot_index(n)]


def _round_scaled(x: np.ndarray, scale: float) -> np.ndarray:
    y = np.rint(x * scale)
    if np.max(np.abs(y), initial=0.0) < 2.0**62:
        return y.astype(np.int64)
    return np.array([int(v) for v in y], dtype=object)


def encode(values, params: CkksParams, target_scale: float | None = None, level: int | None = None,
           rep: Rep = Rep.COEFF) -> RnsPolynomial:
    scale = params.scale if target_scale is None else float(target_scale)
    level = params.levels if level is None else level
    coeffs = _round_scaled(embed_inverse(values, params.n_poly), scale)
    pt = RnsPolynomial.from_ints(coeffs, params.basis_at(level), rep)
    return RnsPolynomial(pt.data, pt.basis, pt.rep, scale)


def encode_coeffs(values, basis: RnsBasis, n: int, scale: float) -> RnsPolynomial:
    """Coefficient encoding: values[i] * scale rounded into coefficient i."""
    c = np.zeros(n, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size > n:
        raise SlotOverflow(f"{v.size} values exceed {n} coefficients")
    c[: v.size] = v
    pt = RnsPolynomial.from_ints(_round_scaled(c, 1.0 * scale), basis)
    return RnsPolynomial(pt.data, pt.basis, pt.rep, float(scale))


def decode(pt: RnsPolynomial, params: CkksParams, scale: float | None = None, count: int | None = None) -> np.ndarray:
    scale = scale if scale is not None else (pt.scale if pt.scale is not None else params.scale)
    ints = pt.to_ints(centered=True)
    coeffs = np.array([float(x) for x in ints]) if ints.dtype == object else ints.astype(np.float64)
    vals = embed(coeffs / scale, params.n_poly)
    return vals if count is None else vals[:count]


def decode_coeffs(pt: RnsPolynomial, scale: float) -> np.ndarray:
    ints = pt.to_ints(centered=True)
    coeffs = np.array([float(x) for x in ints]) if ints.dtype == object else ints.astype(np.float64)
    return coeffs / scale

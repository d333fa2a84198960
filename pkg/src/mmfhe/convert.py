"""Moving data between the CKKS and TFHE worlds.

CKKS -> TFHE: bring the ciphertext to a single limb and sample-extract one
LWE per coefficient.  TFHE -> CKKS: embed each LWE as an RLWE ciphertext
whose constant coefficient carries the phase, merge them with the recursive
even/odd packing, then run the field trace to clear every coefficient off the
stride N/n_slot.

Conventions: CKKS decrypts as b + a*s, the LWE side as b - <a, s>.  After
packing plus trace, coefficient i*N/n_slot holds N times phase i; the factor
is removed at decode time rather than spending a level on it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .ckks import (
    CkksParams,
    KeySet,
    RlweCiphertext,
    RnsPolynomial,
    add_galois_key,
    apply_galois,
    decode_coeffs,
    decrypt,
    drop_level,
    encode_coeffs,
    encrypt,
    hadd,
    hsub,
)
from .errors import DimensionMismatch, LevelMismatch, ShapeError, SlotOverflow
from .polyring import Rep
from .tfhe import GlweCiphertext, LweCiphertext, sample_extract, stack_lwes


def _log2(n: int) -> int:
    return n.bit_length() - 1


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def trace_elements(n_poly: int, n_slot: int) -> list[int]:
    """Galois elements used by the field trace, in application order."""
    logn = _log2(n_poly)
    return [(1 << (logn - k + 1)) + 1 for k in range(1, _log2(n_poly // n_slot) + 1)]


def pack_elements(n_slot: int) -> list[int]:
    """Galois elements 2^j + 1 used by the packing recursion down from n_slot."""
    return [(1 << j) + 1 for j in range(1, _log2(n_slot) + 1)]


def conversion_elements(n_poly: int) -> list[int]:
    """Every element either stage can need for any n_slot: 2^j + 1, j = 1..log N."""
    return [(1 << j) + 1 for j in range(1, _log2(n_poly) + 1)]


@dataclass
class ConversionContext:
    params: CkksParams
    keys: KeySet
    n_slot: int
    scale: float

    def __post_init__(self):
        n = self.params.n_poly
        if not _is_pow2(self.n_slot):
            raise ShapeError(f"n_slot = {self.n_slot} is not a power of two")
        if self.n_slot > n:
            raise SlotOverflow(f"n_slot = {self.n_slot} exceeds N = {n}")

    @property
    def stride(self) -> int:
        return self.params.n_poly // self.n_slot

    @classmethod
    def create(cls, params: CkksParams, keys: KeySet, n_slot: int, scale: float | None = None,
               rng=None) -> "ConversionContext":
        """Attach the Galois keys the conversion needs (2^j + 1 for all j)."""
        for g in conversion_elements(params.n_poly):
            if g not in keys.galois:
                add_galois_key(keys, g, rng)
        return cls(params, keys, n_slot, default_scale(params) if scale is None else scale)


def default_scale(params: CkksParams) -> float:
    """Largest power-of-two scale for which N * scale * |v| <= 1 still fits in
    q_0 / 4, leaving headroom for noise after the trace multiplies by N."""
    q0 = params.ciphertext_basis.values[0]
    return float(2 ** (q0.bit_length() - _log2(params.n_poly) - 2))


# CKKS -> TFHE -------------------------------------------------------------

def _as_glwe(ct: RlweCiphertext) -> GlweCiphertext:
    if ct.level != 0:
        raise LevelMismatch(f"extraction needs a single-limb ciphertext, got level {ct.level}")
    a = ct.a.to_rep(Rep.COEFF)
    b = ct.b.to_rep(Rep.COEFF)
    q = ct.basis.values[0]
    neg_a = kernels.negmod(a.data[0], q)  # b + a*s == b - (-a)*s
    return GlweCiphertext(np.stack([neg_a, b.data[0]]), ct.basis[0], Rep.COEFF)


def ckks_to_lwe_batch(ct: RlweCiphertext, n_slot: int) -> LweCiphertext:
    """Batched form of :func:`ckks_to_lwes`: one LweCiphertext of shape (n_slot,)."""
    n = ct.n
    if n_slot < 1 or n_slot > n:
        raise SlotOverflow(f"cannot extract {n_slot} coefficients from N = {n}")
    glwe = _as_glwe(ct)
    return stack_lwes([sample_extract(glwe, i) for i in range(n_slot)])


def ckks_to_lwes(ct: RlweCiphertext, n_slot: int) -> list[LweCiphertext]:
    """LWE i has phase equal to coefficient i of ct's plaintext (key: the CKKS
    secret's coefficient vector)."""
    batch = ckks_to_lwe_batch(ct, n_slot)
    return [batch[i] for i in range(n_slot)]


# TFHE -> CKKS -------------------------------------------------------------

def ring_embed(c: LweCiphertext, params: CkksParams, scale: float = 1.0) -> RlweCiphertext:
    """RLWE ciphertext (level 0) whose plaintext constant term is c's phase.

    With a(X) = -a[0] + sum_{i>0} a[i] X^(N-i) the constant term of a*s is
    -<a, s>, so b + a*s has constant coefficient b - <a, s>.
    """
    n = params.n_poly
    if c.dim != n:
        raise DimensionMismatch(f"LWE dimension {c.dim} differs from N = {n}")
    basis = params.basis_at(0)
    q = basis.values[0]
    if c.q != q:
        raise DimensionMismatch(f"LWE modulus {c.q} differs from q_0 = {q}")
    a = np.asarray(c.a, dtype=np.uint64).reshape(n)
    emb = np.empty(n, dtype=np.uint64)
    emb[0] = (q - int(a[0])) % q
    emb[1:] = a[:0:-1]
    b = np.zeros(n, dtype=np.uint64)
    b[0] = int(np.asarray(c.b).reshape(())) % q
    a_poly = RnsPolynomial(emb[None], basis, Rep.COEFF).ntt()
    b_poly = RnsPolynomial(b[None], basis, Rep.COEFF).ntt()
    return RlweCiphertext(a_poly, b_poly, scale)


def _monomial(ct: RlweCiphertext, r: int) -> RlweCiphertext:
    a = ct.a.to_rep(Rep.COEFF).monomial_mul(r).ntt()
    b = ct.b.to_rep(Rep.COEFF).monomial_mul(r).ntt()
    return RlweCiphertext(a, b, ct.scale)


def pack_lwes(cts: list[RlweCiphertext], keys: KeySet, params: CkksParams | None = None) -> RlweCiphertext:
    """Merge n ring-embedded ciphertexts so input j lands on coefficient
    j*N/n, scaled by n (coefficients off that stride are left as garbage for
    the field trace)."""
    m = len(cts)
    if not _is_pow2(m):
        raise ShapeError(f"pack_lwes needs a power-of-two count, got {m}")
    if m == 1:
        return cts[0]
    params = keys.params if params is None else params
    even = pack_lwes(cts[0::2], keys, params)
    odd = pack_lwes(cts[1::2], keys, params)
    shifted = _monomial(odd, cts[0].n // m)
    return hadd(hadd(even, shifted), apply_galois(hsub(even, shifted), m + 1, keys, params))


def field_trace(ct: RlweCiphertext, n_slot: int, keys: KeySet, params: CkksParams | None = None) -> RlweCiphertext:
    """Sum over the automorphisms fixing X^(N/n_slot): coefficients at the
    stride are multiplied by N/n_slot, all others cancel."""
    params = keys.params if params is None else params
    for g in trace_elements(ct.n, n_slot):
        ct = hadd(ct, apply_galois(ct, g, keys, params))
    return ct


def lwes_to_ckks(cts, ctx: ConversionContext) -> RlweCiphertext:
    """ring_embed -> pack_lwes -> field_trace.  Accepts a list of LWEs or one
    batched LweCiphertext."""
    if isinstance(cts, LweCiphertext):
        items = [cts] if cts.batch_shape == () else [cts[i] for i in range(len(cts))]
    else:
        items = list(cts)
    if len(items) != ctx.n_slot:
        raise ShapeError(f"expected {ctx.n_slot} LWE ciphertexts, got {len(items)}")
    rlwes = [ring_embed(c, ctx.params, ctx.scale) for c in items]
    packed = pack_lwes(rlwes, ctx.keys, ctx.params)
    return field_trace(packed, ctx.n_slot, ctx.keys, ctx.params)


# encode / decode helpers for the round trip -----------------------------------

def encrypt_coeffs(values, ctx: ConversionContext, key, rng=None) -> RlweCiphertext:
    """Coefficient-encode up to N values at ctx.scale, encrypt, drop to level 0."""
    params = ctx.params
    pt = encode_coeffs(values, params.basis_at(params.levels), params.n_poly, ctx.scale)
    ct = encrypt(pt, key, params, rng)
    return drop_level(ct, 0)


def decode_packed(ct: RlweCiphertext, ctx: ConversionContext, key) -> np.ndarray:
    """The n_slot values carried at stride N/n_slot, with the factor N removed."""
    coeffs = decode_coeffs(decrypt(ct, key), ctx.scale)
    return coeffs[:: ctx.stride][: ctx.n_slot] / ctx.params.n_poly


def round_trip(values, ctx: ConversionContext, key, rng=None) -> np.ndarray:
    """Encrypt coefficients, extract n_slot LWEs, convert back, decode."""
    ct = encrypt_coeffs(values, ctx, key, rng)
    return decode_packed(lwes_to_ckks(ckks_to_lwe_batch(ct, ctx.n_slot), ctx), ctx, key)

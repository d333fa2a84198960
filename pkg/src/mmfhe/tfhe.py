"""TFHE over an NTT-friendly prime modulus near 2^32.

Conventions:
  * LWE phase is b - <a, s>; GLWE phase is B - sum_c A_c * S_c.
  * Messages use a padding bit by default: m in [0, 2^p) is encoded as
    m * q / 2^(p+1).  With ``padding=False`` the whole torus is used
    (Delta = q / 2^p) and LUTs must be negacyclic.
  * Polynomial work is batched: ciphertext arrays carry arbitrary leading
    batch axes, so one blind rotation call bootstraps many LWEs at once.
  * GGSW rows are ordered component-major, digit-minor (row = c*l_b + j).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DecompositionOverflow, DimensionMismatch, IndexOutOfRange, NegacyclicViolation
from .modmath import Modulus, find_ntt_prime
from .polyring import NttTables, Rep, decompose_signed, gadget_scale, gadget_values, rotate_coeffs, signed_to_residue


@dataclass(frozen=True)
class TfheParams:
    name: str
    n_poly: int
    n_lwe: int
    glwe_dim: int
    modulus: Modulus
    l_b: int
    log_base_b: int
    l_k: int
    log_base_k: int
    plaintext_bits: int = 1
    padding: bool = True
    lwe_sigma: float = 2.0**14
    glwe_sigma: float = 2.0**4

    @property
    def q(self) -> int:
        return self.modulus.value

    @property
    def space(self) -> int:
        return 1 << self.plaintext_bits

    @property
    def delta(self) -> int:
        return (2 * self.q + self.space * (2 if self.padding else 1)) // (2 * self.space * (2 if self.padding else 1))

    @property
    def extracted_dim(self) -> int:
        return self.glwe_dim * self.n_poly

    def with_message_bits(self, bits: int, padding: bool | None = None) -> "TfheParams":
        from dataclasses import replace

        return replace(self, plaintext_bits=bits, padding=self.padding if padding is None else padding)

    def params_hash(self) -> bytes:
        s = (f"tfhe|{self.n_poly}|{self.n_lwe}|{self.glwe_dim}|{self.q}|{self.l_b}|{self.log_base_b}|"
             f"{self.l_k}|{self.log_base_k}|{self.plaintext_bits}|{self.padding}|{self.lwe_sigma}|{self.glwe_sigma}")
        return hashlib.sha256(s.encode()).digest()[:16]


def make_tfhe_params(name: str, n_poly: int, n_lwe: int, glwe_dim: int, l_b: int, nominal_bits: int = 32,
                     l_k: int = 3, log_base_k: int = 6, **kw) -> TfheParams:
    """Modulus: the prime nearest 2^nominal_bits with p = 1 mod 2N.  Bootstrap
    base defaults to floor(bits / (l_b + 1))."""
    m = find_ntt_prime(nominal_bits, 2 * n_poly)
    log_base_b = kw.pop("log_base_b", m.bits // (l_b + 1))
    return TfheParams(name, n_poly, n_lwe, glwe_dim, m, l_b, log_base_b, l_k, log_base_k, **kw)


TFHE_PRESETS = {
    # name: (N, n_lwe, k, l_b)
    "toy": (64, 4, 1, 2),
    "Set-I": (1024, 500, 1, 2),
    "Set-II": (1024, 630, 1, 3),
    "Set-III": (2048, 592, 1, 3),
}


@lru_cache(maxsize=None)
def tfhe_preset(name: str) -> TfheParams:
    try:
        n, n_lwe, k, l_b = TFHE_PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown TFHE parameter set {name!r}; known: {sorted(TFHE_PRESETS)}") from None
    extra = {}
    if name == "toy":
        extra = dict(lwe_sigma=2.0**8, glwe_sigma=2.0)
    return make_tfhe_params(name, n, n_lwe, k, l_b, **extra)


# ciphertext types ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LweCiphertext:
    a: np.ndarray  # (..., n) uint64
    b: np.ndarray  # (...) uint64
    q: int

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.uint64))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.uint64))

    @property
    def dim(self) -> int:
        return self.a.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.b.shape

    def __getitem__(self, idx) -> "LweCiphertext":
        return LweCiphertext(self.a[idx], self.b[idx], self.q)

    def __len__(self) -> int:
        return self.b.shape[0]

    def __add__(self, other: "LweCiphertext") -> "LweCiphertext":
        return LweCiphertext(_addq(self.a, other.a, self.q), _addq(self.b, other.b, self.q), self.q)

    def __sub__(self, other: "LweCiphertext") -> "LweCiphertext":
        return LweCiphertext(_subq(self.a, other.a, self.q), _subq(self.b, other.b, self.q), self.q)

    def add_constant(self, c: int) -> "LweCiphertext":
        return LweCiphertext(self.a, (self.b + np.uint64(c % self.q)) % np.uint64(self.q), self.q)

    def __eq__(self, other) -> bool:
        return (isinstance(other, LweCiphertext) and other.q == self.q
                and np.array_equal(other.a, self.a) and np.array_equal(other.b, self.b))

    __hash__ = None


def stack_lwes(cts: Sequence[LweCiphertext]) -> LweCiphertext:
    return LweCiphertext(np.stack([c.a for c in cts]), np.stack([c.b for c in cts]), cts[0].q)


@dataclass(frozen=True, eq=False)
class GlweCiphertext:
    data: np.ndarray  # (..., k+1, N): masks then body
    modulus: Modulus
    rep: Rep = Rep.COEFF

    def __post_init__(self):
        object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.uint64))

    @property
    def k(self) -> int:
        return self.data.shape[-2] - 1

    @property
    def n(self) -> int:
        return self.data.shape[-1]

    @property
    def masks(self) -> np.ndarray:
        return self.data[..., :-1, :]

    @property
    def body(self) -> np.ndarray:
        return self.data[..., -1, :]


@dataclass(frozen=True, eq=False)
class GgswCiphertext:
    data: np.ndarray  # ((k+1)*l_b, k+1, N), evaluation rep
    modulus: Modulus
    l_b: int
    log_base: int


@dataclass(frozen=True, eq=False)
class TfheSecretKey:
    lwe: np.ndarray  # (n_lwe,) binary
    glwe: np.ndarray  # (k, N) binary

    @property
    def extracted(self) -> np.ndarray:
        return self.glwe.reshape(-1)


@dataclass(frozen=True, eq=False)
class BootstrapKeys:
    bsk: np.ndarray  # (n_lwe, (k+1)*l_b, k+1, N) evaluation rep
    ksk: np.ndarray  # (k*N*l_k, n_lwe+1): rows (i, j) -> LWE(s_ext[i] * g_j), mask then body
    params: TfheParams = field(repr=False)


# small helpers ----------------------------------------------------------------

def _addq(x, y, q):
    t = np.asarray(x, dtype=np.uint64) + np.asarray(y, dtype=np.uint64)
    return t - np.uint64(q) * (t >= np.uint64(q)).astype(np.uint64)


def _subq(x, y, q):
    t = np.asarray(x, dtype=np.uint64) + (np.uint64(q) - np.asarray(y, dtype=np.uint64))
    return t - np.uint64(q) * (t >= np.uint64(q)).astype(np.uint64)


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def _gauss(rng, sigma, shape) -> np.ndarray:
    return np.rint(rng.normal(0.0, sigma, shape)).astype(np.int64)


def centered(x: np.ndarray, q: int) -> np.ndarray:
    v = np.asarray(x, dtype=np.uint64).astype(np.int64)
    return np.where(v > q // 2, v - q, v)


def _tables(params_or_mod, n: int | None = None) -> NttTables:
    if isinstance(params_or_mod, TfheParams):
        return NttTables.create(params_or_mod.modulus, params_or_mod.n_poly)
    return NttTables.create(params_or_mod, n)


def _ntt(x: np.ndarray, t: NttTables) -> np.ndarray:
    shape = x.shape
    return t.forward(x.reshape(-1, shape[-1])).reshape(shape)


def _intt(x: np.ndarray, t: NttTables) -> np.ndarray:
    shape = x.shape
    return t.inverse(x.reshape(-1, shape[-1])).reshape(shape)


def poly_mul_batch(x: np.ndarray, s_hat: np.ndarray, t: NttTables) -> np.ndarray:
    """Negacyclic products of coefficient-rep x (..., N) with a fixed
    evaluation-rep polynomial broadcastable to x."""
    return _intt(kernels.mulmod(_ntt(x, t), np.broadcast_to(s_hat, x.shape), t.q), t)


# keys & encryption ---------------------------------------------------------------

def encode_message(m, params: TfheParams) -> np.ndarray:
    return (np.asarray(m, dtype=np.int64) % (params.space * (2 if params.padding else 1)) * params.delta) % params.q


def lwe_encrypt(m, key, params: TfheParams, rng=None, *, noiseless: bool = False, sigma: float | None = None) -> LweCiphertext:
    """Encrypt scalar or array messages; array inputs give a batch."""
    s = key.lwe if isinstance(key, TfheSecretKey) else np.asarray(key)
    rng = _rng(rng)
    q = params.q
    mm = np.asarray(m)
    a = rng.integers(0, q, mm.shape + (s.shape[0],), dtype=np.uint64)
    if noiseless:
        e = np.zeros(mm.shape, dtype=np.int64)
    else:
        e = _gauss(rng, params.lwe_sigma if sigma is None else sigma, mm.shape)
    dot = _dot_mod(a, s, q)
    b = (dot + encode_message(mm, params) + e) % q
    return LweCiphertext(a, b.astype(np.uint64), q)


def _dot_mod(a: np.ndarray, s: np.ndarray, q: int) -> np.ndarray:
    """<a, s> mod q for small-integer s, exact via float64 halves."""
    s = np.asarray(s, dtype=np.int64)
    lo = (a & np.uint64(0xFFFF)).astype(np.float64) @ s.astype(np.float64)
    hi = (a >> np.uint64(16)).astype(np.float64) @ s.astype(np.float64)
    lo = np.asarray(lo).astype(np.int64) % q
    hi = np.asarray(hi).astype(np.int64) % q
    return (hi * 65536 + lo) % q


def lwe_phase(ct: LweCiphertext, key) -> np.ndarray:
    s = key.lwe if isinstance(key, TfheSecretKey) else np.asarray(key)
    if ct.dim != s.shape[0]:
        raise DimensionMismatch(f"ciphertext dim {ct.dim} vs key dim {s.shape[0]}")
    ph = (ct.b.astype(np.int64) - _dot_mod(ct.a, s, ct.q)) % ct.q
    return centered(ph, ct.q)


def lwe_decrypt(ct: LweCiphertext, key, params: TfheParams) -> np.ndarray:
    ph = lwe_phase(ct, key)
    total = params.space * (2 if params.padding else 1)
    return np.floor(ph / params.delta + 0.5).astype(np.int64) % total


def glwe_encrypt(msg, key: TfheSecretKey | np.ndarray, params: TfheParams, rng=None, *, noiseless: bool = False) -> GlweCiphertext:
    """GLWE encryption of integer polynomial(s) msg (..., N), already scaled."""
    s = key.glwe if isinstance(key, TfheSecretKey) else np.asarray(key)
    rng = _rng(rng)
    q, n, k = params.q, params.n_poly, s.shape[0]
    msg = np.asarray(msg, dtype=np.int64)
    batch = msg.shape[:-1]
    t = _tables(params)
    a = rng.integers(0, q, batch + (k, n), dtype=np.uint64)
    e = np.zeros(batch + (n,), np.int64) if noiseless else _gauss(rng, params.glwe_sigma, batch + (n,))
    s_hat = _ntt(s.astype(np.uint64), t)
    prod = poly_mul_batch(a, s_hat, t)
    body = prod[..., 0, :]
    for c in range(1, k):
        body = _addq(body, prod[..., c, :], q)
    body = _addq(body, ((msg + e) % q).astype(np.uint64), q)
    return GlweCiphertext(np.concatenate([a, body[..., None, :]], axis=-2), params.modulus)


def glwe_phase(ct: GlweCiphertext, key) -> np.ndarray:
    """Centered coefficients of B - sum A_c S_c."""
    s = key.glwe if isinstance(key, TfheSecretKey) else np.asarray(key)
    q = ct.modulus.value
    t = _tables(ct.modulus, ct.n)
    data = ct.data if ct.rep == Rep.COEFF else _intt(ct.data, t)
    prod = poly_mul_batch(np.ascontiguousarray(data[..., :-1, :]), _ntt(s.astype(np.uint64), t), t)
    ph = data[..., -1, :]
    for c in range(s.shape[0]):
        ph = _subq(ph, prod[..., c, :], q)
    return centered(ph, q)


def trivial_glwe(body, params: TfheParams) -> GlweCiphertext:
    body = np.asarray(body, dtype=np.int64) % params.q
    data = np.zeros(body.shape[:-1] + (params.glwe_dim + 1, params.n_poly), dtype=np.uint64)
    data[..., -1, :] = body
    return GlweCiphertext(data, params.modulus)


def ggsw_encrypt(mu, key, params: TfheParams, rng=None, *, noiseless: bool = False) -> GgswCiphertext | np.ndarray:
    """GGSW encryption of integer(s) mu; an array of mu gives stacked raw data
    of shape (len(mu), (k+1)*l_b, k+1, N)."""
    s = key.glwe if isinstance(key, TfheSecretKey) else np.asarray(key)
    k, l_b = s.shape[0], params.l_b
    mus = np.atleast_1d(np.asarray(mu, dtype=np.int64))
    rows = (k + 1) * l_b
    zeros = np.zeros((mus.size, rows, params.n_poly), dtype=np.int64)
    ct = glwe_encrypt(zeros, s, params, rng, noiseless=noiseless).data  # (B, rows, k+1, N)
    g = gadget_values(params.q, l_b, params.log_base_b)
    q = params.q
    for c in range(k + 1):
        for j in range(l_b):
            add = (mus % q) * g[j] % q
            ct[:, c * l_b + j, c, 0] = (ct[:, c * l_b + j, c, 0] + add.astype(np.uint64)) % np.uint64(q)
    data = _ntt(ct, _tables(params))
    if np.ndim(mu) == 0:
        return GgswCiphertext(data[0], params.modulus, l_b, params.log_base_b)
    return data


def tfhe_keygen(params: TfheParams, rng=0) -> tuple[TfheSecretKey, BootstrapKeys]:
    rng = _rng(rng)
    sk = TfheSecretKey(rng.integers(0, 2, params.n_lwe).astype(np.int64),
                       rng.integers(0, 2, (params.glwe_dim, params.n_poly)).astype(np.int64))
    return sk, make_bootstrap_keys(sk, params, rng)


def make_bootstrap_keys(sk: TfheSecretKey, params: TfheParams, rng=None, *, noiseless: bool = False) -> BootstrapKeys:
    rng = _rng(rng)
    bsk = ggsw_encrypt(sk.lwe, sk, params, rng, noiseless=noiseless)
    return BootstrapKeys(bsk, make_ksk(sk.extracted, sk.lwe, params, rng, noiseless=noiseless), params)


def make_ksk(s_from: np.ndarray, s_to: np.ndarray, params: TfheParams, rng=None, *, noiseless: bool = False) -> np.ndarray:
    rng = _rng(rng)
    q = params.q
    g = np.array(gadget_values(q, params.l_k, params.log_base_k), dtype=np.int64)
    msg = (s_from[:, None] * g[None, :]).reshape(-1) % q
    rows = msg.shape[0]
    a = rng.integers(0, q, (rows, s_to.shape[0]), dtype=np.uint64)
    e = np.zeros(rows, np.int64) if noiseless else _gauss(rng, params.lwe_sigma, rows)
    b = (_dot_mod(a, s_to, q) + msg + e) % q
    return np.concatenate([a, b.astype(np.uint64)[:, None]], axis=1)


# PBS building blocks ----------------------------------------------------------------

def mod_switch(c: LweCiphertext, params: TfheParams) -> LweCiphertext:
    """Each component x -> round(2N * x / q), half away from zero, into [0, 2N)."""
    two_n = 2 * params.n_poly
    q = c.q

    def sw(x):
        x = np.asarray(x, dtype=np.uint64).astype(np.int64)
        # floor((2 * 2N * x + q) / (2q)) with 64-bit-safe pieces
        hi = x // q  # 0 here since x < q, kept for clarity
        num = (2 * two_n) * (x - hi * q) + q
        return ((num // (2 * q)) + hi * two_n) % two_n

    return LweCiphertext(sw(c.a).astype(np.uint64), sw(c.b).astype(np.uint64), two_n)


def _decompose_glwe(x: np.ndarray, q: int, levels: int, log_base: int, rot=None) -> np.ndarray:
    """(B, k+1, N) -> (B, (k+1)*levels, N) residue digits, component-major.
    With `rot`, decomposes x*X^rot[b] - x instead."""
    if levels * log_base > q.bit_length():
        raise DecompositionOverflow(f"{levels} x {log_base} bits exceed a {q.bit_length()}-bit modulus")
    return kernels.decompose_rows(x, rot, q, levels, log_base, gadget_scale(q, levels, log_base))


def _ep_core(digits: np.ndarray, key: np.ndarray, modulus: Modulus, n: int) -> np.ndarray:
    q = modulus.value
    t = _tables(modulus, n)
    return _intt(kernels.gadget_mac(_ntt(digits, t), key, q, kind="MAC"), t)


def external_product(glwe: GlweCiphertext, ggsw: GgswCiphertext | np.ndarray, params: TfheParams | None = None) -> GlweCiphertext:
    """GLWE (coefficient rep, any batch shape) times a GGSW in evaluation rep."""
    if isinstance(ggsw, GgswCiphertext):
        key, l_b, log_base = ggsw.data, ggsw.l_b, ggsw.log_base
    else:
        key, l_b, log_base = ggsw, params.l_b, params.log_base_b
    q = glwe.modulus.value
    batch = glwe.data.shape[:-2]
    x = glwe.data.reshape((-1,) + glwe.data.shape[-2:])
    out = _ep_core(_decompose_glwe(x, q, l_b, log_base), key, glwe.modulus, glwe.n)
    return GlweCiphertext(out.reshape(batch + out.shape[-2:]), glwe.modulus)


def blind_rotate(tv: GlweCiphertext, c_tilde: LweCiphertext, bsk: np.ndarray, params: TfheParams) -> GlweCiphertext:
    """ACC_0 = tv * X^(-b~); ACC_i = ACC + EP(ACC * X^(a~_i) - ACC, bsk_i).

    The result is tv * X^(-(b~ - sum a~_i s_i)).  Batched over c_tilde.
    """
    q = params.q
    batch = c_tilde.b.shape
    b = c_tilde.b.astype(np.int64).reshape(batch + (1,))
    data = np.broadcast_to(tv.data, batch + tv.data.shape[-2:])
    acc = rotate_coeffs(np.ascontiguousarray(data), -b, q)
    a = c_tilde.a.astype(np.int64).reshape((-1, c_tilde.a.shape[-1]))
    shape = acc.shape
    acc = np.ascontiguousarray(acc.reshape((-1,) + shape[-2:]))
    for i in range(a.shape[-1]):
        # digits of ACC * X^(a~_i) - ACC, rotation fused into the decomposition
        digits = _decompose_glwe(acc, q, params.l_b, params.log_base_b, a[:, i])
        acc = _addq(acc, _ep_core(digits, bsk[i], params.modulus, params.n_poly), q)
    return GlweCiphertext(acc.reshape(shape), params.modulus)


def sample_extract(glwe: GlweCiphertext, i: int = 0) -> LweCiphertext:
    """LWE of dimension k*N whose phase is coefficient i of the GLWE phase."""
    n = glwe.n
    if not 0 <= i < n:
        raise IndexOutOfRange(f"coefficient index {i} outside [0, {n})")
    q = glwe.modulus.value
    j = np.arange(n)
    src = (i - j) % n
    neg = j > i
    masks = glwe.masks[..., src]  # (..., k, N)
    masks = np.where(neg & (masks != 0), np.uint64(q) - masks, masks)
    a = masks.reshape(masks.shape[:-2] + (-1,))
    return LweCiphertext(a, glwe.body[..., i], q)


def tfhe_keyswitch(c: LweCiphertext, ksk: np.ndarray, params: TfheParams) -> LweCiphertext:
    """c'' = (0, b') - sum_i sum_j digit_j(a'_i) * ksk[i][j]."""
    q = params.q
    rows = ksk.shape[0]
    if c.dim * params.l_k != rows:
        raise DimensionMismatch(f"ciphertext dim {c.dim} does not match key rows {rows}")
    batch = c.b.shape
    a = c.a.reshape(-1, c.dim)
    d = decompose_signed(a, q, params.l_k, params.log_base_k)  # (l_k, B, dim)
    d = np.moveaxis(d, 0, -1).reshape(a.shape[0], rows).astype(np.float64)
    lo = d @ (ksk & np.uint64(0xFFFF)).astype(np.float64)
    hi = d @ (ksk >> np.uint64(16)).astype(np.float64)
    acc = (hi.astype(np.int64) % q * 65536 + lo.astype(np.int64) % q) % q  # (B, n+1)
    kernels.record("MAC")
    out_a = (-acc[:, :-1]) % q
    out_b = (c.b.reshape(-1).astype(np.int64) - acc[:, -1]) % q
    n = ksk.shape[1] - 1
    return LweCiphertext(out_a.astype(np.uint64).reshape(batch + (n,)), out_b.astype(np.uint64).reshape(batch), q)


def lut_table(lut: Callable[[int], int] | Sequence[int], params: TfheParams) -> np.ndarray:
    total = params.space
    vals = [lut(m) for m in range(total)] if callable(lut) else list(lut)
    if len(vals) != total:
        raise ValueError(f"LUT needs {total} entries")
    return np.array(vals, dtype=np.int64)


def build_test_vector(lut, params: TfheParams) -> GlweCiphertext:
    """Noiseless GLWE whose body coefficient j carries the LUT value for the
    message whose phase window contains j."""
    vals = lut_table(lut, params)
    n, q, delta, sp = params.n_poly, params.q, params.delta, params.space
    j = np.arange(n, dtype=np.int64)
    if params.padding:
        m = (2 * j * sp + n) // (2 * n)  # round(j * 2^p / N)
        body = np.where(m == sp, -delta * vals[0], delta * vals[np.minimum(m, sp - 1)])
    else:
        h = sp // 2
        bad = [x for x in range(h) if (vals[x + h] + vals[x] + 1) % sp]
        if bad:
            raise NegacyclicViolation(f"LUT is not negacyclic at inputs {bad}")
        m = (j * sp + n) // (2 * n)  # round(j * 2^p / 2N)
        body = delta * vals[m % sp] + delta // 2
    return trivial_glwe(body % q, params)


def pbs(c: LweCiphertext, lut, keys: BootstrapKeys, params: TfheParams | None = None) -> LweCiphertext:
    """ModSwitch -> BlindRotate -> SampleExtract -> KeySwitch."""
    params = params or keys.params
    tv = build_test_vector(lut, params)
    ct = mod_switch(c, params)
    acc = blind_rotate(tv, ct, keys.bsk, params)
    ext = sample_extract(acc, 0)
    out = tfhe_keyswitch(ext, keys.ksk, params)
    if not params.padding:
        out = out.add_constant(-(params.delta // 2))
    return out


def pbs_batched(c: LweCiphertext, lut, keys: BootstrapKeys, params: TfheParams | None = None, chunk: int = 250) -> LweCiphertext:
    """pbs over a 1-D batch in chunks to bound memory."""
    outs = [pbs(c[i:i + chunk], lut, keys, params) for i in range(0, len(c), chunk)]
    return LweCiphertext(np.concatenate([o.a for o in outs]), np.concatenate([o.b for o in outs]), outs[0].q)


# boolean gates ------------------------------------------------------------------

def gate_params(params: TfheParams) -> TfheParams:
    """Bits are encrypted in a 2-bit padded space so a sum of two bits (0..2)
    stays inside the LUT domain; gate outputs use the same encoding."""
    return params.with_message_bits(2, padding=True)


def nand(c1: LweCiphertext, c2: LweCiphertext, keys: BootstrapKeys, params: TfheParams | None = None) -> LweCiphertext:
    """NAND of two bit ciphertexts encrypted under gate_params: bootstrap the
    sum with the threshold LUT [1, 1, 0, 0]."""
    gp = gate_params(params or keys.params)
    return pbs_batched(c1 + c2, [1, 1, 0, 0], keys, gp)

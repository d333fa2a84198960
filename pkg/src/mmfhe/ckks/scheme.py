"""RLWE encryption and the homomorphic operations built on hybrid key switching.

Ciphertexts live in evaluation representation and decrypt as b + a*s.
Key switching takes its input in coefficient representation, extends each
RNS digit to the ciphertext-plus-special basis, takes the inner product with
the switching key, and divides by the special modulus P on the way down.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .. import kernels
from ..errors import BasisMismatch, KeyNotFound, LevelMismatch, RepError, ScaleMismatch
from ..modmath import RnsBasis
from ..polyring import Rep, galois_element
from .params import CkksParams
from .rns import RnsPolynomial, bconv, rescale_poly

SCALE_RTOL = 1e-9


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_ternary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Coefficients in {-1, 0, 1}, zero with probability 1/2."""
    u = rng.integers(0, 4, n)
    return np.select([u == 0, u == 1], [1, -1], 0).astype(np.int64)


def sample_gaussian(n: int, sigma: float, rng: np.random.Generator, shape=()) -> np.ndarray:
    return np.rint(rng.normal(0.0, sigma, tuple(shape) + (n,))).astype(np.int64)


def sample_uniform(basis: RnsBasis, n: int, rng: np.random.Generator, rep: Rep = Rep.EVAL) -> RnsPolynomial:
    data = np.stack([rng.integers(0, q, n, dtype=np.uint64) for q in basis.values])
    return RnsPolynomial(data, basis, rep)


@dataclass(frozen=True, eq=False)
class SecretKey:
    coeffs: np.ndarray  # int64 in {-1, 0, 1}
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def on(self, basis: RnsBasis) -> RnsPolynomial:
        """The secret in evaluation representation over `basis`."""
        key = basis.values
        if key not in self._cache:
            self._cache[key] = RnsPolynomial.from_ints(self.coeffs, basis, Rep.EVAL)
        return self._cache[key]


@dataclass(frozen=True, eq=False)
class PublicKey:
    b: RnsPolynomial
    a: RnsPolynomial


@dataclass(frozen=True, eq=False)
class EvaluationKey:
    """Switching key rows (b_i, a_i) over the ciphertext-plus-special basis,
    evaluation representation.  Row i encrypts P * [digit i] * s_src."""
    b: tuple[RnsPolynomial, ...]
    a: tuple[RnsPolynomial, ...]

    @property
    def rows(self) -> int:
        return len(self.b)


@dataclass(eq=False)
class KeySet:
    params: CkksParams
    secret: SecretKey
    public: PublicKey
    relin: EvaluationKey
    galois: dict[int, EvaluationKey] = field(default_factory=dict)

    def rotation_key(self, r: int) -> EvaluationKey:
        return self.galois_key(galois_element(r, self.params.n_poly))

    def galois_key(self, g: int) -> EvaluationKey:
        g %= 2 * self.params.n_poly
        try:
            return self.galois[g]
        except KeyError:
            raise KeyNotFound(f"no switching key for Galois element {g}") from None


@dataclass(frozen=True, eq=False)
class RlweCiphertext:
    a: RnsPolynomial
    b: RnsPolynomial
    scale: float

    @property
    def level(self) -> int:
        return self.b.limbs - 1

    @property
    def basis(self) -> RnsBasis:
        return self.b.basis

    @property
    def n(self) -> int:
        return self.b.n


# keys -----------------------------------------------------------------------

def gen_switch_key(s_src: np.ndarray, sk: SecretKey, params: CkksParams, rng) -> EvaluationKey:
    rng = as_rng(rng)
    n = params.n_poly
    full = params.full_basis
    nq = params.levels + 1
    p_prod = params.special_basis.product
    s_eval = sk.on(full)
    src = RnsPolynomial.from_ints(s_src, full, Rep.EVAL)
    bs, as_ = [], []
    for digit in params.digits_at(params.levels):
        a = sample_uniform(full, n, rng)
        e = RnsPolynomial.from_ints(sample_gaussian(n, params.sigma, rng), full, Rep.EVAL)
        consts = [(p_prod % q) if i in digit else 0 for i, q in enumerate(full.values)]
        consts[nq:] = [0] * len(params.special_basis)
        b = e - a * s_eval + src.scalar_mul(consts)
        bs.append(b)
        as_.append(a)
    return EvaluationKey(tuple(bs), tuple(as_))


def galois_secret(s: np.ndarray, g: int) -> np.ndarray:
    """Coefficients of s(X^g) in Z[X]/(X^N+1)."""
    n = s.shape[0]
    j = np.arange(n)
    dst = (j * g) % (2 * n)
    out = np.zeros(n, dtype=np.int64)
    sign = np.where(dst >= n, -1, 1)
    out[dst % n] = sign * s
    return out


def keygen(params: CkksParams, rng=0, rotations=(), galois=()) -> KeySet:
    rng = as_rng(rng)
    n = params.n_poly
    sk = SecretKey(sample_ternary(n, rng))
    basis = params.ciphertext_basis
    a = sample_uniform(basis, n, rng)
    e = RnsPolynomial.from_ints(sample_gaussian(n, params.sigma, rng), basis, Rep.EVAL)
    pk = PublicKey(e - a * sk.on(basis), a)
    relin = gen_switch_key(_square_secret(sk.coeffs), sk, params, rng)
    keys = KeySet(params, sk, pk, relin)
    gs = [galois_element(r, n) for r in rotations] + [g % (2 * n) for g in galois]
    for g in gs:
        add_galois_key(keys, g, rng)
    return keys


def add_galois_key(keys: KeySet, g: int, rng=None) -> None:
    n = keys.params.n_poly
    g %= 2 * n
    if g in keys.galois or g == 1:
        return
    rng = as_rng(g if rng is None else rng)
    keys.galois[g] = gen_switch_key(galois_secret(keys.secret.coeffs, g), keys.secret, keys.params, rng)


def _square_secret(s: np.ndarray) -> np.ndarray:
    """s^2 in Z[X]/(X^N+1) (small integers, exact)."""
    n = s.shape[0]
    full = np.convolve(s, s)
    out = full[:n].copy()
    out[: n - 1] -= full[n:]
    return out


# encryption -------------------------------------------------------------------

def encrypt(pt: RnsPolynomial, key, params: CkksParams, rng=None, *, trivial: bool = False,
            scale: float | None = None) -> RlweCiphertext:
    """Encrypt under a secret or public key (a KeySet works too).  `trivial=True` is the
    degenerate test hook: no noise and a zero mask, so b = pt exactly."""
    scale = scale if scale is not None else (pt.scale if pt.scale is not None else params.scale)
    m = pt.to_rep(Rep.EVAL)
    basis = m.basis
    n = params.n_poly
    if trivial:
        return RlweCiphertext(RnsPolynomial.zero(n, basis, Rep.EVAL), m, scale)
    rng = as_rng(rng)
    if isinstance(key, KeySet):
        key = key.public
    if isinstance(key, SecretKey):
        a = sample_uniform(basis, n, rng)
        e = RnsPolynomial.from_ints(sample_gaussian(n, params.sigma, rng), basis, Rep.EVAL)
        return RlweCiphertext(a, e - a * key.on(basis) + m, scale)
    if isinstance(key, PublicKey):
        if len(key.b.basis) < len(basis):
            raise LevelMismatch("public key level below plaintext level")
        pb, pa = key.b.restrict(basis), key.a.restrict(basis)
        u = RnsPolynomial.from_ints(sample_ternary(n, rng), basis, Rep.EVAL)
        e0 = RnsPolynomial.from_ints(sample_gaussian(n, params.sigma, rng), basis, Rep.EVAL)
        e1 = RnsPolynomial.from_ints(sample_gaussian(n, params.sigma, rng), basis, Rep.EVAL)
        return RlweCiphertext(u * pa + e1, u * pb + e0 + m, scale)
    raise TypeError(f"cannot encrypt with {type(key).__name__}")


def decrypt(ct: RlweCiphertext, key) -> RnsPolynomial:
    """b + a*s in coefficient representation, tagged with the ciphertext scale."""
    if isinstance(key, KeySet):
        key = key.secret
    s = key.on(ct.basis)
    m = (ct.b + ct.a * s).intt()
    return replace(m, scale=ct.scale)


# key switching ------------------------------------------------------------------

def hybrid_keyswitch(d: RnsPolynomial, evk: EvaluationKey, params: CkksParams) -> tuple[RnsPolynomial, RnsPolynomial]:
    """(ct0, ct1) over C_l in coefficient rep with ct0 + ct1*s ~= d*s_src."""
    if d.rep != Rep.COEFF:
        raise RepError("key switching expects coefficient representation")
    level = d.level
    if d.basis.values != params.basis_at(level).values:
        raise BasisMismatch("input is not over the ciphertext basis prefix")
    full = params.full_basis
    nq = params.levels + 1
    digits = params.digits_at(level)
    if evk.rows < len(digits) or evk.b[0].basis.values != full.values:
        raise BasisMismatch("switching key does not cover the extended basis")
    special = params.special_basis
    ext = d.basis + special  # D = C_l u B
    key_idx = list(range(level + 1)) + list(range(nq, nq + len(special)))
    n = d.n

    ext_digits = []
    for digit in digits:
        part = d.take(list(digit))
        others = [i for i in range(len(ext)) if i not in digit]
        conv = bconv(part, RnsBasis(tuple(ext[i] for i in others)))
        data = np.empty((len(ext), n), dtype=np.uint64)
        data[list(digit)] = part.data
        data[others] = conv.data
        ext_digits.append(RnsPolynomial(data, ext, Rep.COEFF).ntt())

    # inner product with the key matrix, limb by limb
    acc = np.empty((2, len(ext), n), dtype=np.uint64)
    with kernels.kernel_scope("IP"):
        for li, ki in enumerate(key_idx):
            dv = np.stack([x.data[li] for x in ext_digits])[None]
            kv = np.stack([np.stack([evk.b[i].data[ki], evk.a[i].data[ki]]) for i in range(len(digits))])
            acc[:, li] = kernels.gadget_mac(dv, kv, ext.values[li])[0]
    out = []
    p_prod = special.product
    for j in range(2):
        cj = RnsPolynomial(acc[j], ext, Rep.EVAL).intt()
        head = cj.take(range(level + 1))
        tail = cj.take(range(level + 1, len(ext)))
        down = head - bconv(tail, head.basis)
        out.append(down.scalar_mul([pow(p_prod % q, -1, q) for q in head.basis.values]))
    return out[0], out[1]


def _switch(ct_b: RnsPolynomial, a_src: RnsPolynomial, evk: EvaluationKey, params: CkksParams, scale: float) -> RlweCiphertext:
    c0, c1 = hybrid_keyswitch(a_src.intt(), evk, params)
    return RlweCiphertext(c1.ntt(), ct_b + c0.ntt(), scale)


# homomorphic operations ------------------------------------------------------------

def _same_level(x: RlweCiphertext, y: RlweCiphertext):
    if x.level != y.level:
        raise LevelMismatch(f"levels {x.level} and {y.level} differ")


def _same_scale(s1: float, s2: float):
    if abs(s1 - s2) > SCALE_RTOL * max(abs(s1), abs(s2)):
        raise ScaleMismatch(f"scales {s1} and {s2} differ")


def hadd(x: RlweCiphertext, y: RlweCiphertext) -> RlweCiphertext:
    _same_level(x, y)
    _same_scale(x.scale, y.scale)
    return RlweCiphertext(x.a + y.a, x.b + y.b, x.scale)


def hsub(x: RlweCiphertext, y: RlweCiphertext) -> RlweCiphertext:
    _same_level(x, y)
    _same_scale(x.scale, y.scale)
    return RlweCiphertext(x.a - y.a, x.b - y.b, x.scale)


def _pt_at(pt: RnsPolynomial, ct: RlweCiphertext) -> RnsPolynomial:
    if pt.limbs < ct.b.limbs:
        raise LevelMismatch("plaintext level below ciphertext level")
    p = pt.to_rep(Rep.EVAL)
    return p.restrict(ct.basis) if p.limbs != ct.b.limbs else p


def padd(ct: RlweCiphertext, pt: RnsPolynomial) -> RlweCiphertext:
    if pt.scale is not None:
        _same_scale(ct.scale, pt.scale)
    return RlweCiphertext(ct.a, ct.b + _pt_at(pt, ct), ct.scale)


def pmult(ct: RlweCiphertext, pt: RnsPolynomial) -> RlweCiphertext:
    p = _pt_at(pt, ct)
    s = pt.scale if pt.scale is not None else 1.0
    return RlweCiphertext(ct.a * p, ct.b * p, ct.scale * s)


def hmult(x: RlweCiphertext, y: RlweCiphertext, keys: KeySet | EvaluationKey, params: CkksParams | None = None) -> RlweCiphertext:
    """Tensor then relinearize; the result carries scale x.scale * y.scale."""
    _same_level(x, y)
    evk, params = _key_and_params(keys, params, lambda k: k.relin)
    d0 = x.b * y.b
    d1 = x.a * y.b + x.b * y.a
    d2 = x.a * y.a
    c0, c1 = hybrid_keyswitch(d2.intt(), evk, params)
    return RlweCiphertext(d1 + c1.ntt(), d0 + c0.ntt(), x.scale * y.scale)


def _key_and_params(keys, params, pick):
    if isinstance(keys, KeySet):
        return pick(keys), keys.params
    if params is None:
        raise ValueError("params required with a bare switching key")
    return keys, params


def apply_galois(ct: RlweCiphertext, g: int, keys: KeySet | EvaluationKey, params: CkksParams | None = None) -> RlweCiphertext:
    """Automorphism X -> X^g on both components followed by a switch back to s."""
    n = ct.n
    g %= 2 * n
    if g == 1:
        return ct
    evk, params = _key_and_params(keys, params, lambda k: k.galois_key(g))
    return _switch(ct.b.galois(g), ct.a.galois(g), evk, params, ct.scale)


def hrotate(ct: RlweCiphertext, r: int, keys: KeySet | EvaluationKey, params: CkksParams | None = None) -> RlweCiphertext:
    """Cyclic slot rotation by r (slot i receives slot i + r)."""
    g = galois_element(r, ct.n)
    if g == 1:
        return ct
    return apply_galois(ct, g, keys, params)


def rescale(ct: RlweCiphertext) -> RlweCiphertext:
    ql = ct.basis.values[-1]
    return RlweCiphertext(rescale_poly(ct.a), rescale_poly(ct.b), ct.scale / ql)


def drop_level(ct: RlweCiphertext, level: int) -> RlweCiphertext:
    """Discard the top limbs without changing the scale (modulus dropping)."""
    if level > ct.level:
        raise LevelMismatch(f"cannot raise level {ct.level} to {level}")
    idx = range(level + 1)
    return RlweCiphertext(ct.a.take(idx), ct.b.take(idx), ct.scale)

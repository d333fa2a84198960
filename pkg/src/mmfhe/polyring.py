"""Negacyclic ring arithmetic in Z_q[X]/(X^N + 1).

Evaluation-point convention: entry k of the evaluation vector is p(psi^(2k+1))
where psi is the primitive 2N-th root of unity of the modulus, in natural k
order.  The forward transform is a psi^j twist followed by a constant-geometry
(Pease) cyclic DFT; the output permutation of those stages is folded into the
kernel so callers never see bit-reversed data.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DecompositionOverflow, RepError, ShapeError, TableMismatch
from .modmath import Modulus


class Rep(enum.Enum):
    COEFF = "coefficient"
    EVAL = "evaluation"


def bitrev_perm(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        out |= ((idx >> b) & 1) << (bits - 1 - b)
    return out


def _powers(base: int, count: int, q: int) -> np.ndarray:
    out = np.empty(count, dtype=np.uint64)
    x = 1
    for i in range(count):
        out[i] = x
        x = x * base % q
    return out


def _stage_twiddles(omega: int, n: int, q: int) -> np.ndarray:
    """Stage s, butterfly j multiplies by omega^((j >> s) << s)."""
    logn = n.bit_length() - 1
    pw = _powers(omega, n, q)
    j = np.arange(n // 2, dtype=np.int64)
    return np.ascontiguousarray(np.stack([pw[(j >> s) << s] for s in range(logn)])) if logn else np.zeros((0, 0), np.uint64)


@dataclass(frozen=True, eq=False)
class NttTables:
    modulus: Modulus
    n: int
    twiddles: np.ndarray
    inv_twiddles: np.ndarray
    perm: np.ndarray
    twist: np.ndarray
    untwist: np.ndarray
    n_inv: int
    twist_seed: tuple[int, int]
    # Shoup companions floor(w * 2^64 / q) of the tables above
    twiddles_sh: np.ndarray
    inv_twiddles_sh: np.ndarray
    twist_sh: np.ndarray
    untwist_sh: np.ndarray

    @staticmethod
    def create(modulus: Modulus, n: int) -> "NttTables":
        return _tables(modulus, n)

    @property
    def q(self) -> int:
        return self.modulus.value

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Negacyclic forward transform of each row of a (rows, n) array."""
        return kernels.ntt_rows(x, self.twist, self.twist_sh, self.twiddles, self.twiddles_sh, self.perm, self.q)

    def inverse(self, x: np.ndarray) -> np.ndarray:
        return kernels.intt_rows(x, self.inv_twiddles, self.inv_twiddles_sh, self.perm,
                                 self.untwist, self.untwist_sh, self.q)

    def cyclic_forward(self, x: np.ndarray) -> np.ndarray:
        """Plain length-n cyclic DFT with root psi^2 of each row."""
        return kernels.ntt_rows(x, None, None, self.twiddles, self.twiddles_sh, self.perm, self.q)


@lru_cache(maxsize=256)
def _tables(modulus: Modulus, n: int) -> NttTables:
    if n < 2 or n & (n - 1):
        raise ShapeError(f"length {n} is not a power of two")
    if modulus.two_n % (2 * n):
        raise TableMismatch(f"modulus {modulus.value} has no primitive {2 * n}-th root")
    q = modulus.value
    psi = modulus.root_of_unity(2 * n)
    psi_inv = pow(psi, -1, q)
    omega = psi * psi % q
    n_inv = pow(n, -1, q)
    twist = _powers(psi, n, q)
    untwist = np.array([pow(psi_inv, j, q) * n_inv % q for j in range(n)], dtype=np.uint64)
    tw = _stage_twiddles(omega, n, q)
    itw = _stage_twiddles(pow(omega, -1, q), n, q)
    return NttTables(
        modulus=modulus,
        n=n,
        twiddles=tw,
        inv_twiddles=itw,
        perm=bitrev_perm(n),
        twist=twist,
        untwist=untwist,
        n_inv=n_inv,
        twist_seed=(1, psi),
        twiddles_sh=kernels.shoup(tw, q),
        inv_twiddles_sh=kernels.shoup(itw, q),
        twist_sh=kernels.shoup(twist, q),
        untwist_sh=kernels.shoup(untwist, q),
    )


@dataclass(frozen=True, eq=False)
class RingPolynomial:
    coeffs: np.ndarray
    modulus: Modulus
    rep: Rep = Rep.COEFF

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.uint64)
        n = c.shape[-1] if c.ndim == 1 else -1
        if n < 2 or n & (n - 1):
            raise ShapeError("coefficient vector length must be a power of two")
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def q(self) -> int:
        return self.modulus.value

    @classmethod
    def from_ints(cls, values, modulus: Modulus, rep: Rep = Rep.COEFF) -> "RingPolynomial":
        arr = np.array([int(v) % modulus.value for v in values], dtype=np.uint64)
        return cls(arr, modulus, rep)

    @classmethod
    def zero(cls, n: int, modulus: Modulus, rep: Rep = Rep.COEFF) -> "RingPolynomial":
        return cls(np.zeros(n, dtype=np.uint64), modulus, rep)

    def centered(self) -> np.ndarray:
        c = self.coeffs.astype(np.int64)
        return np.where(c > self.q // 2, c - self.q, c)

    def _check(self, other: "RingPolynomial"):
        if other.modulus != self.modulus or other.n != self.n:
            raise TableMismatch("operands differ in modulus or length")
        if other.rep != self.rep:
            raise RepError("operands differ in representation")

    def __add__(self, other: "RingPolynomial") -> "RingPolynomial":
        self._check(other)
        return RingPolynomial(kernels.addmod(self.coeffs, other.coeffs, self.q), self.modulus, self.rep)

    def __sub__(self, other: "RingPolynomial") -> "RingPolynomial":
        self._check(other)
        return RingPolynomial(kernels.submod(self.coeffs, other.coeffs, self.q), self.modulus, self.rep)

    def __neg__(self) -> "RingPolynomial":
        return RingPolynomial(kernels.negmod(self.coeffs, self.q), self.modulus, self.rep)

    def __mul__(self, other: "RingPolynomial") -> "RingPolynomial":
        self._check(other)
        if self.rep != Rep.EVAL:
            raise RepError("pointwise product needs evaluation representation")
        return RingPolynomial(kernels.mulmod(self.coeffs, other.coeffs, self.q), self.modulus, self.rep)

    def scalar_mul(self, c: int) -> "RingPolynomial":
        return RingPolynomial(kernels.mulmod(self.coeffs, np.uint64(int(c) % self.q), self.q), self.modulus, self.rep)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RingPolynomial)
            and other.modulus == self.modulus
            and other.rep == self.rep
            and np.array_equal(other.coeffs, self.coeffs)
        )

    __hash__ = None


def _check_tables(p: RingPolynomial, t: NttTables):
    if t.n != p.n or t.modulus != p.modulus:
        raise TableMismatch(f"tables for (n={t.n}, q={t.q}) applied to (n={p.n}, q={p.q})")


def ntt_forward(p: RingPolynomial, t: NttTables) -> RingPolynomial:
    _check_tables(p, t)
    if p.rep != Rep.COEFF:
        raise RepError("forward NTT expects coefficient representation")
    return RingPolynomial(t.forward(p.coeffs[None])[0], p.modulus, Rep.EVAL)


def ntt_inverse(p: RingPolynomial, t: NttTables) -> RingPolynomial:
    _check_tables(p, t)
    if p.rep != Rep.EVAL:
        raise RepError("inverse NTT expects evaluation representation")
    return RingPolynomial(t.inverse(p.coeffs[None])[0], p.modulus, Rep.COEFF)


def poly_mul(a: RingPolynomial, b: RingPolynomial) -> RingPolynomial:
    """Negacyclic product of two coefficient-rep polynomials via the NTT."""
    t = NttTables.create(a.modulus, a.n)
    return ntt_inverse(ntt_forward(a, t) * ntt_forward(b, t), t)


def of_twist(first: np.ndarray, ratio: np.ndarray, count: int, q: int) -> np.ndarray:
    """Geometric twisting factors generated on the fly.

    Returns a (len(first), count) array whose row i is
    first[i] * ratio[i]^k for k = 0..count-1, built by repeated multiplication
    rather than table lookup.
    """
    out = np.empty((len(first), count), dtype=np.uint64)
    cur = np.asarray(first, dtype=np.uint64)
    for k in range(count):
        out[:, k] = cur
        cur = kernels.mulmod(cur, ratio, q)
    return out


def four_step_ntt(p: RingPolynomial, t1: NttTables, t2: NttTables, twist: str = "on_the_fly") -> RingPolynomial:
    """Negacyclic NTT of length N1*N2 split into a length-N1 phase and a
    length-N2 phase with twisting factors in between.  Output ordering is
    identical to ntt_forward."""
    n1, n2 = t1.n, t2.n
    if n1 * n2 != p.n:
        raise ShapeError(f"{n1} x {n2} does not factor N={p.n}")
    if t1.modulus != p.modulus or t2.modulus != p.modulus:
        raise TableMismatch("phase tables use a different modulus")
    if p.rep != Rep.COEFF:
        raise RepError("four-step NTT expects coefficient representation")
    q = p.q
    n = p.n
    psi = p.modulus.root_of_unity(2 * n)
    omega = psi * psi % q
    x = kernels.mulmod(p.coeffs, _powers(psi, n, q), q)
    # phase 1: for each j2, DFT over j1 where j = N2*j1 + j2
    a = t1.cyclic_forward(x.reshape(n1, n2).T)  # rows j2, cols k1
    if twist == "on_the_fly":
        ratios = _powers(omega, n2, q)
        tw = of_twist(np.ones(n2, dtype=np.uint64), ratios, n1, q)
    elif twist == "table":
        table = _powers(omega, n, q)
        j2 = np.arange(n2, dtype=np.int64)[:, None]
        k1 = np.arange(n1, dtype=np.int64)[None, :]
        tw = table[(j2 * k1) % n]
    else:
        raise ValueError(f"unknown twist mode {twist!r}")
    b = kernels.mulmod(a, tw, q)
    # phase 2: for each k1, DFT over j2; output index k = k1 + N1*k2
    c = t2.cyclic_forward(b.T)  # rows k1, cols k2
    return RingPolynomial(np.ascontiguousarray(c.T).reshape(n), p.modulus, Rep.EVAL)


def galois_element(r: int, n: int) -> int:
    """5^r mod 2N, the Galois element of a slot rotation by r."""
    return pow(5, r, 2 * n)


def automorphism_perm(g: int, n: int, rep: Rep) -> tuple[np.ndarray, np.ndarray | None]:
    """Index map (and negation mask for coefficient rep) of X -> X^g."""
    return _auto_perm(g % (2 * n), n, rep)


@lru_cache(maxsize=512)
def _auto_perm(g: int, n: int, rep: Rep):
    if g % 2 == 0:
        raise ValueError("Galois element must be odd")
    if rep == Rep.EVAL:
        k = np.arange(n, dtype=np.int64)
        src = ((g * (2 * k + 1)) % (2 * n) - 1) // 2
        return src, None
    j = np.arange(n, dtype=np.int64)
    dst = (j * g) % (2 * n)
    neg = dst >= n
    dst = dst % n
    # gather form: out[dst[j]] = +-in[j]
    src = np.empty(n, dtype=np.int64)
    src[dst] = j
    sign = np.empty(n, dtype=bool)
    sign[dst] = neg
    return src, sign


def apply_galois(coeffs: np.ndarray, g: int, q: int, rep: Rep) -> np.ndarray:
    """X -> X^g on the last axis of an array of polynomials."""
    kernels.record("Auto")
    n = coeffs.shape[-1]
    src, neg = automorphism_perm(g, n, rep)
    out = coeffs[..., src]
    if neg is not None:
        out = np.where(neg, np.where(out == 0, out, np.uint64(q) - out), out)
    return np.ascontiguousarray(out)


def automorphism(p: RingPolynomial, r: int) -> RingPolynomial:
    """Slot rotation automorphism X -> X^(5^r), in either representation."""
    g = galois_element(r, p.n)
    return RingPolynomial(apply_galois(p.coeffs, g, p.q, p.rep), p.modulus, p.rep)


def automorphism_by(p: RingPolynomial, g: int) -> RingPolynomial:
    return RingPolynomial(apply_galois(p.coeffs, g, p.q, p.rep), p.modulus, p.rep)


def rotate_coeffs(coeffs: np.ndarray, r, q: int) -> np.ndarray:
    """Multiply each polynomial (last axis) by X^r; r may be an array
    broadcasting against the leading axes."""
    n = coeffs.shape[-1]
    r = np.asarray(r, dtype=np.int64) % (2 * n)
    j = np.arange(n, dtype=np.int64)
    # out[i] = sign * in[(i - r) mod 2N] folded into [0, N)
    src = (j - r[..., None]) % (2 * n)
    neg = src >= n
    src = src % n
    out = np.take_along_axis(coeffs, np.broadcast_to(src, coeffs.shape[:-1] + (n,)), axis=-1) if src.ndim > 1 else coeffs[..., src]
    negb = np.broadcast_to(neg, out.shape)
    return np.where(negb & (out != 0), np.uint64(q) - out, out)


def monomial_rotate(p: RingPolynomial, r: int) -> RingPolynomial:
    if p.rep != Rep.COEFF:
        raise RepError("monomial rotation expects coefficient representation")
    return RingPolynomial(rotate_coeffs(p.coeffs, r, p.q), p.modulus, p.rep)


def gadget_scale(q: int, levels: int, log_base: int) -> int:
    return (2 * q + (1 << (levels * log_base))) // (2 << (levels * log_base))


def gadget_values(q: int, levels: int, log_base: int) -> list[int]:
    """g_j = B^(levels-1-j) * scale, most significant digit first."""
    scale = gadget_scale(q, levels, log_base)
    return [(scale << (log_base * (levels - 1 - j))) % q for j in range(levels)]


def decompose_signed(x: np.ndarray, q: int, levels: int, log_base: int) -> np.ndarray:
    """Signed base-2^log_base digits of round(x / scale), most significant first.

    Input residues are centered into (-q/2, q/2] first so the top digit never
    wraps.  Returns an int64 array of shape (levels,) + x.shape.
    """
    if levels * log_base > q.bit_length():
        raise DecompositionOverflow(f"{levels} x {log_base} bits exceed a {q.bit_length()}-bit modulus")
    scale = gadget_scale(q, levels, log_base)
    xc = np.asarray(x, dtype=np.uint64).astype(np.int64)
    xc = np.where(xc > q // 2, xc - q, xc)
    y = np.floor_divide(2 * xc + scale, 2 * scale)
    base = 1 << log_base
    half = base >> 1
    out = np.empty((levels,) + xc.shape, dtype=np.int64)
    for j in range(levels - 1, 0, -1):
        d = ((y + half) & (base - 1)) - half
        out[j] = d
        y = (y - d) >> log_base
    out[0] = y
    return out


def signed_to_residue(d: np.ndarray, q: int) -> np.ndarray:
    return np.where(d < 0, d + q, d).astype(np.uint64)


def digit_decompose(p: RingPolynomial, levels: int, log_base: int) -> list[RingPolynomial]:
    if p.rep != Rep.COEFF:
        raise RepError("decomposition expects coefficient representation")
    digits = decompose_signed(p.coeffs, p.q, levels, log_base)
    return [RingPolynomial(signed_to_residue(d, p.q), p.modulus, Rep.COEFF) for d in digits]

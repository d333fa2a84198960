"""Polynomials in R_Q held as one residue vector per RNS limb, plus the
basis-conversion and rescaling kernels that act on them."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .. import kernels
from ..errors import BasisMismatch, LevelMismatch, NoLevelsLeft, RepError, TableMismatch
from ..modmath import RnsBasis, crt_reconstruct
from ..polyring import NttTables, Rep, apply_galois


@dataclass(frozen=True, eq=False)
class RnsPolynomial:
    data: np.ndarray  # (limbs, N) uint64
    basis: RnsBasis
    rep: Rep = Rep.COEFF
    scale: float | None = None  # set on encoded plaintexts

    def __post_init__(self):
        d = np.ascontiguousarray(self.data, dtype=np.uint64)
        if d.ndim != 2 or d.shape[0] != len(self.basis):
            raise BasisMismatch(f"data shape {d.shape} does not match a {len(self.basis)}-limb basis")
        object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return self.data.shape[1]

    @property
    def limbs(self) -> int:
        return self.data.shape[0]

    @property
    def level(self) -> int:
        return self.limbs - 1

    def __len__(self) -> int:
        return self.limbs

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, n: int, basis: RnsBasis, rep: Rep = Rep.COEFF) -> "RnsPolynomial":
        return cls(np.zeros((len(basis), n), dtype=np.uint64), basis, rep)

    @classmethod
    def from_ints(cls, coeffs, basis: RnsBasis, rep: Rep = Rep.COEFF) -> "RnsPolynomial":
        """Reduce signed integer coefficients (int64 or object array) into every limb."""
        c = np.asarray(coeffs)
        rows = []
        for q in basis.values:
            if c.dtype == object:
                rows.append(np.array([int(x) % q for x in c], dtype=np.uint64))
            else:
                rows.append(np.mod(c.astype(np.int64), q).astype(np.uint64))
        out = cls(np.stack(rows), basis, Rep.COEFF)
        return out.ntt() if rep == Rep.EVAL else out

    def to_ints(self, centered: bool = True) -> np.ndarray:
        p = self if self.rep == Rep.COEFF else self.intt()
        if p.limbs == 1:
            q = p.basis.values[0]
            v = p.data[0].astype(np.int64)
            if centered:
                v = np.where(v >= q - q // 2, v - q, v)
            return v
        return crt_reconstruct(list(p.data), p.basis, centered=centered)

    # representation -----------------------------------------------------
    def tables(self, i: int) -> NttTables:
        return NttTables.create(self.basis[i], self.n)

    def ntt(self) -> "RnsPolynomial":
        if self.rep != Rep.COEFF:
            raise RepError("already in evaluation representation")
        rows = [self.tables(i).forward(self.data[i : i + 1])[0] for i in range(self.limbs)]
        return replace(self, data=np.stack(rows) if rows else self.data, rep=Rep.EVAL)

    def intt(self) -> "RnsPolynomial":
        if self.rep != Rep.EVAL:
            raise RepError("already in coefficient representation")
        rows = [self.tables(i).inverse(self.data[i : i + 1])[0] for i in range(self.limbs)]
        return replace(self, data=np.stack(rows) if rows else self.data, rep=Rep.COEFF)

    def to_rep(self, rep: Rep) -> "RnsPolynomial":
        if rep == self.rep:
            return self
        return self.ntt() if rep == Rep.EVAL else self.intt()

    # limb selection -----------------------------------------------------
    def take(self, indices: Sequence[int]) -> "RnsPolynomial":
        idx = list(indices)
        return replace(self, data=self.data[idx], basis=RnsBasis(tuple(self.basis[i] for i in idx),
                                                                  tuple(self.basis.roles[i] for i in idx)))

    def restrict(self, basis: RnsBasis) -> "RnsPolynomial":
        """Keep only the limbs of `basis`, which must be a subset of ours."""
        pos = {q: i for i, q in enumerate(self.basis.values)}
        try:
            idx = [pos[q] for q in basis.values]
        except KeyError:
            raise BasisMismatch("target basis is not a subset of the polynomial's basis") from None
        return replace(self, data=self.data[idx], basis=basis)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "RnsPolynomial"):
        if other.basis.values != self.basis.values:
            if len(other.basis) != len(self.basis):
                raise LevelMismatch(f"operands have {self.limbs} and {other.limbs} limbs")
            raise BasisMismatch("operands use different bases")
        if other.rep != self.rep:
            raise RepError("operands differ in representation")
        if other.n != self.n:
            raise TableMismatch("operands differ in ring dimension")

    def _map2(self, other, fn) -> "RnsPolynomial":
        self._check(other)
        rows = [fn(self.data[i], other.data[i], q) for i, q in enumerate(self.basis.values)]
        return RnsPolynomial(np.stack(rows), self.basis, self.rep)

    def __add__(self, other: "RnsPolynomial") -> "RnsPolynomial":
        return self._map2(other, kernels.addmod)

    def __sub__(self, other: "RnsPolynomial") -> "RnsPolynomial":
        return self._map2(other, kernels.submod)

    def __mul__(self, other: "RnsPolynomial") -> "RnsPolynomial":
        if self.rep != Rep.EVAL or other.rep != Rep.EVAL:
            raise RepError("pointwise product needs evaluation representation")
        return self._map2(other, kernels.mulmod)

    def __neg__(self) -> "RnsPolynomial":
        rows = [kernels.negmod(self.data[i], q) for i, q in enumerate(self.basis.values)]
        return RnsPolynomial(np.stack(rows), self.basis, self.rep)

    def scalar_mul(self, c) -> "RnsPolynomial":
        """Multiply by an integer constant, or by one constant per limb."""
        if np.ndim(c) == 0:
            c = [int(c)] * self.limbs
        rows = [kernels.mulmod(self.data[i], np.uint64(int(ci) % q), q)
                for i, (ci, q) in enumerate(zip(c, self.basis.values))]
        return RnsPolynomial(np.stack(rows), self.basis, self.rep)

    def galois(self, g: int) -> "RnsPolynomial":
        """X -> X^g applied to every limb."""
        with kernels.kernel_scope("Auto"):
            rows = [apply_galois(self.data[i], g, q, self.rep) for i, q in enumerate(self.basis.values)]
        return RnsPolynomial(np.stack(rows), self.basis, self.rep)

    def monomial_mul(self, r: int) -> "RnsPolynomial":
        """Multiply by X^r (coefficient rep: a signed index shift)."""
        if self.rep != Rep.COEFF:
            raise RepError("monomial multiply expects coefficient representation")
        from ..polyring import rotate_coeffs

        with kernels.kernel_scope("ModAdd"):
            rows = [rotate_coeffs(self.data[i], r, q) for i, q in enumerate(self.basis.values)]
        return RnsPolynomial(np.stack(rows), self.basis, self.rep)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RnsPolynomial)
            and other.basis.values == self.basis.values
            and other.rep == self.rep
            and np.array_equal(other.data, self.data)
        )

    __hash__ = None


def bconv(p: RnsPolynomial, target: RnsBasis, centered: bool = True) -> RnsPolynomial:
    """Fast basis extension from p's basis C to `target`.

    out_j = sum_i [x_i * (C/c_i)^-1]_{c_i} * (C/c_i) mod d_j.  With
    ``centered`` the bracket is the centered residue in (-c_i/2, c_i/2], so
    the result is x + u*C with |u| <= len(C)/2 and u has zero mean; otherwise
    0 <= u < len(C).  The overshoot u is not corrected.
    """
    if p.rep != Rep.COEFF:
        raise RepError("basis conversion expects coefficient representation")
    src = p.basis.values
    big_c = p.basis.product
    with kernels.kernel_scope("BConv"):
        ys = []
        for i, c in enumerate(src):
            chat_inv = pow((big_c // c) % c, -1, c)
            ys.append(kernels.mulmod(p.data[i], np.uint64(chat_inv), c))
        highs = [y > np.uint64(c // 2) for y, c in zip(ys, src)] if centered else None
        rows = []
        for d in target.values:
            acc = np.zeros(p.n, dtype=np.uint64)
            for i, c in enumerate(src):
                y = ys[i] % np.uint64(d) if c > d else ys[i]
                if centered:
                    y = np.where(highs[i], kernels.submod(y, np.uint64(c % d), d), y)
                acc = kernels.addmod(acc, kernels.mulmod(y, np.uint64((big_c // c) % d), d), d)
            rows.append(acc)
    data = np.stack(rows) if rows else np.zeros((0, p.n), dtype=np.uint64)
    return RnsPolynomial(data, target, Rep.COEFF)


def rescale_poly(p: RnsPolynomial) -> RnsPolynomial:
    """Divide by the last modulus q_l and round: (x - [x]_{q_l}) * q_l^-1 with
    the centered remainder, limb by limb."""
    if p.limbs < 2:
        raise NoLevelsLeft("cannot rescale a single-limb polynomial")
    ql = p.basis.values[-1]
    last = p.take([p.limbs - 1])
    if p.rep == Rep.EVAL:
        last = last.intt()
    x = last.data[0]
    upper = x > np.uint64(ql // 2)
    rows = []
    for i, q in enumerate(p.basis.values[:-1]):
        with kernels.kernel_scope("ModAdd"):
            r = x % np.uint64(q)
            # centered remainder x - q_l when x > q_l/2
            r = np.where(upper, kernels.submod(r, np.uint64(ql % q), q), r)
        if p.rep == Rep.EVAL:
            r = NttTables.create(p.basis[i], p.n).forward(r[None])[0]
        diff = kernels.submod(p.data[i], r, q)
        rows.append(kernels.mulmod(diff, np.uint64(pow(ql, -1, q)), q))
    return RnsPolynomial(np.stack(rows), p.basis[:-1], p.rep)

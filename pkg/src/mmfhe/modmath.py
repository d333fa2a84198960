"""Word-size modular arithmetic plus NTT-friendly prime search and RNS/CRT
helpers."""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import BasisMismatch, NoInverse, SearchExhausted

MAX_BITS = 36
# candidates examined on each side of 2^bit_target before giving up
SEARCH_STEPS = 1 << 16
ROOT_SEED = 0x5EED

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Modulus:
    value: int
    two_n: int
    primitive_root: int

    def __int__(self) -> int:
        return self.value

    @property
    def bits(self) -> int:
        return self.value.bit_length()

    def root_of_unity(self, order: int) -> int:
        """Primitive root of unity of the given power-of-two order dividing two_n."""
        if self.two_n % order:
            raise ValueError(f"order {order} does not divide 2N={self.two_n}")
        return pow(self.primitive_root, self.two_n // order, self.value)

    @classmethod
    def from_prime(cls, value: int, two_n: int) -> "Modulus":
        if not is_prime(value) or (value - 1) % two_n:
            raise ValueError(f"{value} is not a prime congruent to 1 mod {two_n}")
        return cls(value, two_n, find_primitive_root(value, two_n))


def mod_mul(a: int, b: int, m: Modulus | int) -> int:
    q = int(m)
    assert 0 <= a < q and 0 <= b < q, "residue out of range"
    return a * b % q


def mod_inv(a: int, m: Modulus | int) -> int:
    q = int(m)
    if a % q == 0:
        raise NoInverse(f"{a} has no inverse modulo {q}")
    return pow(a, -1, q)


def find_primitive_root(p: int, two_n: int, seed: int = ROOT_SEED) -> int:
    """A generator of the two_n-th roots of unity mod p (two_n a power of two)."""
    rng = random.Random(seed ^ p)
    e = (p - 1) // two_n
    while True:
        g = pow(rng.randrange(2, p), e, p)
        if two_n == 1 or pow(g, two_n // 2, p) == p - 1:
            return g


def _candidates(bit_target: int, two_n: int):
    """Integers = 1 mod two_n ordered by distance from 2^bit_target, the
    smaller one first on ties."""
    t = 1 << bit_target
    below = t - ((t - 1) % two_n)
    above = below + two_n
    for _ in range(SEARCH_STEPS):
        if t - below <= above - t:
            yield below
            below -= two_n
        else:
            yield above
            above += two_n


def find_ntt_prime(bit_target: int, two_n: int, exclude: Iterable[int] = ()) -> Modulus:
    """Prime closest to 2^bit_target with p = 1 mod two_n, below 2^36."""
    if two_n < 2 or two_n & (two_n - 1):
        raise ValueError("two_n must be a power of two >= 2")
    if bit_target > MAX_BITS:
        raise ValueError(f"bit_target must be <= {MAX_BITS}")
    skip = set(int(x) for x in exclude)
    for c in _candidates(bit_target, two_n):
        if c <= two_n or c >= 1 << MAX_BITS or c in skip:
            continue
        if is_prime(c):
            return Modulus(c, two_n, find_primitive_root(c, two_n))
    raise SearchExhausted(f"no prime = 1 mod {two_n} within {SEARCH_STEPS} steps of 2^{bit_target}")


def ntt_prime_chain(bit_target: int, two_n: int, count: int, exclude: Iterable[int] = ()) -> list[Modulus]:
    """The `count` primes nearest 2^bit_target (in search order), skipping `exclude`."""
    out: list[Modulus] = []
    skip = set(int(x) for x in exclude)
    for _ in range(count):
        m = find_ntt_prime(bit_target, two_n, skip)
        skip.add(m.value)
        out.append(m)
    return out


@dataclass(frozen=True)
class RnsBasis:
    moduli: tuple[Modulus, ...]
    roles: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(self.moduli))
        if not self.roles:
            object.__setattr__(self, "roles", ("q",) * len(self.moduli))
        object.__setattr__(self, "roles", tuple(self.roles))
        vals = [m.value for m in self.moduli]
        if len(set(vals)) != len(vals):
            raise BasisMismatch("moduli must be pairwise distinct")
        if len(self.roles) != len(self.moduli):
            raise BasisMismatch("one role tag per modulus")

    def __len__(self) -> int:
        return len(self.moduli)

    def __iter__(self):
        return iter(self.moduli)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return RnsBasis(self.moduli[i], self.roles[i])
        return self.moduli[i]

    def __add__(self, other: "RnsBasis") -> "RnsBasis":
        return RnsBasis(self.moduli + other.moduli, self.roles + other.roles)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(m.value for m in self.moduli)

    @cached_property
    def product(self) -> int:
        return reduce(lambda x, y: x * y, self.values, 1)

    def reduce(self, x):
        """Forward reduction of an integer (or object array of integers)."""
        if isinstance(x, np.ndarray):
            return np.stack([(x % q).astype(np.uint64) for q in self.values])
        return [int(x) % q for q in self.values]


def crt_reconstruct(residues: Sequence, basis: RnsBasis, centered: bool = False):
    """Unique x in [0, Q) (or [-Q/2, Q/2) when centered) with the given residues.

    Accepts one residue per modulus, either ints or equal-length arrays; arrays
    give back an object array of Python integers.
    """
    if len(residues) != len(basis):
        raise BasisMismatch(f"{len(residues)} residues for a basis of {len(basis)} moduli")
    big_q = basis.product
    vector = isinstance(residues[0], np.ndarray)
    acc = 0
    for r, q in zip(residues, basis.values):
        qhat = big_q // q
        w = qhat * pow(qhat % q, -1, q)
        if vector:
            acc = acc + np.asarray(r, dtype=np.uint64).astype(object) * w
        else:
            acc += int(r) * w
    acc = acc % big_q
    if centered:
        half = big_q // 2
        if vector:
            acc = np.where(acc >= big_q - half, acc - big_q, acc)
        elif acc >= big_q - half:
            acc -= big_q
    return acc

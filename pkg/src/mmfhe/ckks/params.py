"""CKKS parameter sets and the deterministic moduli chain behind them."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache

from ..modmath import MAX_BITS, RnsBasis, find_ntt_prime, ntt_prime_chain


@dataclass(frozen=True)
class CkksParams:
    name: str
    n_poly: int
    levels: int
    dnum: int
    ciphertext_basis: RnsBasis
    special_basis: RnsBasis
    log_scale: int
    sigma: float = 3.2

    @property
    def alpha(self) -> int:
        return math.ceil((self.levels + 1) / self.dnum)

    @property
    def scale(self) -> float:
        return float(2**self.log_scale)

    @property
    def slots(self) -> int:
        return self.n_poly // 2

    @property
    def full_basis(self) -> RnsBasis:
        return self.ciphertext_basis + self.special_basis

    def basis_at(self, level: int) -> RnsBasis:
        return self.ciphertext_basis[: level + 1]

    def digits_at(self, level: int) -> list[range]:
        """Limb index ranges of the RNS digits at a level (alpha limbs each)."""
        a = self.alpha
        return [range(i, min(i + a, level + 1)) for i in range(0, level + 1, a)]

    def params_hash(self) -> bytes:
        h = hashlib.sha256()
        h.update(f"ckks|{self.n_poly}|{self.levels}|{self.dnum}|{self.log_scale}|{self.sigma}".encode())
        for q in self.full_basis.values:
            h.update(q.to_bytes(8, "little"))
        return h.digest()[:16]


def make_ckks_params(name: str, n_poly: int, levels: int, dnum: int, log_scale: int,
                     base_bits: int = MAX_BITS, special_bits: int = MAX_BITS) -> CkksParams:
    """q_0 is the 2N-friendly prime nearest 2^base_bits, q_1..q_L the primes
    nearest 2^log_scale (so rescaling keeps the scale near 2^log_scale), and
    the alpha special primes the next ones nearest 2^special_bits."""
    two_n = 2 * n_poly
    q0 = find_ntt_prime(base_bits, two_n)
    chain = ntt_prime_chain(log_scale, two_n, levels, exclude={q0.value})
    used = {q0.value} | {m.value for m in chain}
    alpha = math.ceil((levels + 1) / dnum)
    special = ntt_prime_chain(special_bits, two_n, alpha, exclude=used)
    return CkksParams(
        name=name,
        n_poly=n_poly,
        levels=levels,
        dnum=dnum,
        ciphertext_basis=RnsBasis(tuple([q0] + chain), ("q",) * (levels + 1)),
        special_basis=RnsBasis(tuple(special), ("p",) * alpha),
        log_scale=log_scale,
    )


PRESETS = {
    # name: (N, L, dnum, log scale)
    "toy": (64, 2, 2, 30),
    "desk": (1 << 13, 5, 2, 30),
    "conv": (1 << 14, 8, 3, 30),
    "default": (1 << 16, 35, 3, 30),
}


@lru_cache(maxsize=None)
def ckks_preset(name: str) -> CkksParams:
    try:
        n, levels, dnum, log_scale = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown CKKS parameter set {name!r}; known: {sorted(PRESETS)}") from None
    return make_ckks_params(name, n, levels, dnum, log_scale)

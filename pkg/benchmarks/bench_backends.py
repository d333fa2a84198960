"""Compiled vs pure-Python kernel backends.

    python3 benchmarks/bench_backends.py [--repeat 5]

Times the row NTT, inverse NTT, gadget decomposition and an external product
at a few sizes under each backend, checks both backends give identical
output, and prints the speedup.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mmfhe import kernels
from mmfhe import tfhe as T
from mmfhe.modmath import find_ntt_prime
from mmfhe.polyring import NttTables, gadget_scale


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(rng: np.random.Generator):
    for n in (1 << 10, 1 << 13, 1 << 16):
        m = find_ntt_prime(36, 2 * n)
        t = NttTables.create(m, n)
        x = rng.integers(0, m.value, (8, n), dtype=np.uint64)
        yield f"ntt 8x{n}", lambda t=t, x=x: t.forward(x)
        y = t.forward(x)
        yield f"intt 8x{n}", lambda t=t, y=y: t.inverse(y)
    p = T.tfhe_preset("Set-I")
    q = p.q
    x = rng.integers(0, q, (16, 2, p.n_poly), dtype=np.uint64)
    scale = gadget_scale(q, p.l_b, p.log_base_b)
    yield "decompose 16x2x1024", lambda: kernels.decompose_rows(x, None, q, p.l_b, p.log_base_b, scale)
    sk, keys = T.tfhe_keygen(p, 0)
    glwe = T.glwe_encrypt(rng.integers(0, 2, p.n_poly), sk, p, rng)
    yield "external product Set-I", lambda: T.external_product(glwe, keys.bsk[0], p)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        kernels.use_backend("cython")
    except ImportError:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    print(f"{'case':<26}{'cython ms':>12}{'python ms':>12}{'speedup':>10}  same")
    for name, fn in cases(np.random.default_rng(0)):
        kernels.use_backend("cython")
        tc, oc = _best(fn, args.repeat)
        kernels.use_backend("python")
        tp, op = _best(fn, args.repeat)
        a = oc.data if hasattr(oc, "data") else oc
        b = op.data if hasattr(op, "data") else op
        print(f"{name:<26}{tc * 1e3:>12.3f}{tp * 1e3:>12.3f}{tp / tc:>10.2f}  {np.array_equal(a, b)}")
    kernels.use_backend("cython")


if __name__ == "__main__":
    main()

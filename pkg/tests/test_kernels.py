import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmfhe import kernels
from mmfhe.modmath import find_ntt_prime
from mmfhe.polyring import NttTables, decompose_signed, gadget_scale, signed_to_residue

Q = find_ntt_prime(36, 1 << 11)
T = NttTables.create(Q, 1024)

compiled = pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled extension not built")


@pytest.fixture
def backend():
    old = kernels.BACKEND
    yield kernels.use_backend
    kernels.use_backend(old)


@given(st.lists(st.integers(0, (1 << 36) - 1), min_size=1, max_size=30))
def test_shoup_companion_is_floor(ws):
    q = Q.value
    ws = [w % q for w in ws]
    sh = kernels.shoup(np.array(ws, dtype=np.uint64), q)
    assert sh.tolist() == [(w << 64) // q for w in ws]


@given(st.lists(st.tuples(st.integers(0, Q.value - 1), st.integers(0, Q.value - 1)), min_size=1, max_size=40))
def test_mulmod_exact(pairs):
    a = np.array([p[0] for p in pairs], dtype=np.uint64)
    b = np.array([p[1] for p in pairs], dtype=np.uint64)
    assert kernels.mulmod(a, b, Q.value).tolist() == [x * y % Q.value for x, y in pairs]


def test_add_sub_neg(rng):
    q = Q.value
    a = rng.integers(0, q, 100, dtype=np.uint64)
    b = rng.integers(0, q, 100, dtype=np.uint64)
    ai, bi = a.tolist(), b.tolist()
    assert kernels.addmod(a, b, q).tolist() == [(x + y) % q for x, y in zip(ai, bi)]
    assert kernels.submod(a, b, q).tolist() == [(x - y) % q for x, y in zip(ai, bi)]
    assert kernels.negmod(a, q).tolist() == [(-x) % q for x in ai]


def _run_all(rng):
    q = Q.value
    x = rng.integers(0, q, (4, 1024), dtype=np.uint64)
    fw = T.forward(x)
    inv = T.inverse(fw)
    cyc = T.cyclic_forward(x)
    y = rng.integers(0, q, (3, 2, 1024), dtype=np.uint64)
    scale = gadget_scale(q, 3, 10)
    dec = kernels.decompose_rows(y, None, q, 3, 10, scale)
    rot = kernels.decompose_rows(y, np.array([5, -7, 900]), q, 3, 10, scale)
    d = rng.integers(0, q, (2, 6, 1024), dtype=np.uint64)
    key = rng.integers(0, q, (6, 2, 1024), dtype=np.uint64)
    mac = kernels.gadget_mac(d, key, q)
    return fw, inv, cyc, dec, rot, mac, x


@compiled
def test_backends_agree(backend):
    backend("cython")
    c = _run_all(np.random.default_rng(9))
    backend("python")
    p = _run_all(np.random.default_rng(9))
    for a, b in zip(c, p):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("name", ["python", "cython"])
def test_backend_results_against_definitions(name, backend, rng):
    if name == "cython" and kernels.BACKEND != "cython" and not _has_ext():
        pytest.skip("compiled extension not built")
    backend(name)
    q = Q.value
    fw, inv, cyc, dec, rot, mac, x = _run_all(rng)
    assert np.array_equal(inv, x)
    digits = decompose_signed(np.ascontiguousarray(np.zeros(1, dtype=np.uint64)), q, 3, 10)
    assert not digits.any()
    # gadget_mac: out[b, j] = sum_i d[b, i] * key[i, j] pointwise
    d = rng.integers(0, q, (1, 3, 8), dtype=np.uint64)
    key = rng.integers(0, q, (3, 2, 8), dtype=np.uint64)
    got = kernels.gadget_mac(d, key, q)
    di, ki = d.astype(object), key.astype(object)
    want = np.array([[sum(di[0, i, t] * ki[i, j, t] for i in range(3)) % q for t in range(8)] for j in range(2)])
    assert got[0].tolist() == want.tolist()


def test_decompose_rows_matches_reference(rng):
    q = Q.value
    y = rng.integers(0, q, (2, 2, 1024), dtype=np.uint64)
    scale = gadget_scale(q, 3, 10)
    got = kernels.decompose_rows(y, None, q, 3, 10, scale)
    ref = signed_to_residue(decompose_signed(y, q, 3, 10), q)  # (levels, B, C, N)
    want = np.moveaxis(ref, 0, 2).reshape(2, 6, 1024)
    assert np.array_equal(got, want)


def _has_ext():
    try:
        from mmfhe import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def test_count_kernels_records_calls():
    x = np.zeros((3, 1024), dtype=np.uint64)
    with kernels.count_kernels() as c:
        T.forward(x)
        kernels.mulmod(x, x, Q.value)
    assert c["NTT"] == 3 and c["ModMul"] == 1


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_pure_env_selects_fallback():
    env = dict(os.environ, MMFHE_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from mmfhe import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_read_only_inputs_accepted(rng):
    q = Q.value
    a = rng.integers(0, q, (2, 1024), dtype=np.uint64)
    a.setflags(write=False)
    b = np.broadcast_to(a[0], a.shape)
    assert kernels.mulmod(a, b, q).tolist() == [[x * y % q for x, y in zip(r, a[0].tolist())] for r in a.tolist()]
    assert np.array_equal(T.inverse(T.forward(a)), a)
    d = rng.integers(0, q, (1, 2, 1024), dtype=np.uint64)
    d.setflags(write=False)
    kernels.gadget_mac(d, np.ascontiguousarray(np.stack([d[0], d[0]], axis=1)), q)

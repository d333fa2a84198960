import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmfhe.ckks import RnsPolynomial, ckks_preset, decrypt, encrypt, keygen
from mmfhe.ckks.scheme import RlweCiphertext
from mmfhe.convert import (
    ConversionContext, ckks_to_lwe_batch, ckks_to_lwes, decode_packed, encrypt_coeffs, field_trace,
    lwes_to_ckks, pack_elements, pack_lwes, ring_embed, round_trip, trace_elements,
)
from mmfhe.errors import DimensionMismatch, KeyNotFound, LevelMismatch, ShapeError, SlotOverflow
from mmfhe.polyring import Rep, apply_galois
from mmfhe.tfhe import LweCiphertext, lwe_phase


@pytest.fixture(scope="module")
def conv():
    p = ckks_preset("toy")
    keys = keygen(p, 21)
    ctx = ConversionContext.create(p, keys, 8, rng=22)
    return p, keys, ctx


def q0(p):
    return p.ciphertext_basis.values[0]


def plain(ct, keys):
    """Decrypted level-0 plaintext as centered integers."""
    return decrypt(ct, keys).to_ints()


def trivial_lwe(m, p):
    return LweCiphertext(np.zeros(p.n_poly, np.uint64), np.uint64(m % q0(p)), q0(p))


def noiseless_lwe(m, s, p, rng):
    q = q0(p)
    a = rng.integers(0, q, p.n_poly, dtype=np.uint64)
    dot = sum(int(x) * int(y) for x, y in zip(a, s)) % q
    return LweCiphertext(a, np.uint64((dot + m) % q), q)


def level0(values, p, keys, rng):
    pt = RnsPolynomial.from_ints(np.asarray(values, dtype=np.int64), p.basis_at(0))
    return encrypt(pt, keys, p, rng)


def test_element_lists():
    assert trace_elements(64, 64) == []
    assert trace_elements(64, 8) == [65, 33, 17]
    assert pack_elements(8) == [3, 5, 9]
    assert pack_elements(1) == []


# CKKS -> LWE ---------------------------------------------------------------------

def test_extract_single(conv, rng):
    p, keys, _ = conv
    ct = level0(rng.integers(-1000, 1000, p.n_poly), p, keys, rng)
    out = ckks_to_lwes(ct, 1)
    assert len(out) == 1
    assert int(lwe_phase(out[0], keys.secret.coeffs)) == plain(ct, keys)[0]


def test_extract_zero(conv):
    p, keys, _ = conv
    z = RnsPolynomial.zero(p.n_poly, p.basis_at(0), Rep.EVAL)
    lwes = ckks_to_lwe_batch(RlweCiphertext(z, z, 1.0), 16)
    assert not np.any(lwe_phase(lwes, keys.secret.coeffs))


def test_extract_matches_decryption(conv, rng):
    p, keys, _ = conv
    ct = level0(rng.integers(-(2**20), 2**20, p.n_poly), p, keys, rng)
    lwes = ckks_to_lwe_batch(ct, p.n_poly)
    assert lwe_phase(lwes, keys.secret.coeffs).tolist() == plain(ct, keys).tolist()


def test_extract_errors(conv, rng):
    p, keys, _ = conv
    ct = level0(np.zeros(p.n_poly, np.int64), p, keys, rng)
    with pytest.raises(SlotOverflow):
        ckks_to_lwes(ct, p.n_poly + 1)
    high = encrypt(RnsPolynomial.zero(p.n_poly, p.basis_at(1)), keys, p, rng)
    with pytest.raises(LevelMismatch):
        ckks_to_lwes(high, 2)


# ring embedding ------------------------------------------------------------------

def test_ring_embed_zero(conv):
    p, _, _ = conv
    out = ring_embed(LweCiphertext(np.zeros(p.n_poly, np.uint64), np.uint64(0), q0(p)), p)
    assert not out.a.data.any() and not out.b.data.any()


def test_ring_embed_noiseless_message(conv, rng):
    p, keys, _ = conv
    m = 123456789
    ct = ring_embed(noiseless_lwe(m, keys.secret.coeffs, p, rng), p)
    assert plain(ct, keys)[0] == m


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_extract_embed_adjoint(seed):
    p = ckks_preset("toy")
    rng = np.random.default_rng(seed)
    s = rng.integers(-1, 2, p.n_poly)
    c = LweCiphertext(rng.integers(0, q0(p), p.n_poly, dtype=np.uint64), rng.integers(0, q0(p), dtype=np.uint64), q0(p))
    back = ckks_to_lwes(ring_embed(c, p), 1)[0]
    assert int(lwe_phase(back, s)) == int(lwe_phase(c, s))


def test_ring_embed_errors(conv):
    p, _, _ = conv
    with pytest.raises(DimensionMismatch):
        ring_embed(LweCiphertext(np.zeros(p.n_poly - 1, np.uint64), np.uint64(0), q0(p)), p)
    with pytest.raises(DimensionMismatch):
        ring_embed(LweCiphertext(np.zeros(p.n_poly, np.uint64), np.uint64(0), 97), p)


# packing -----------------------------------------------------------------------------

def test_pack_single_is_identity(conv):
    p, keys, _ = conv
    ct = ring_embed(trivial_lwe(5, p), p)
    assert pack_lwes([ct], keys) is ct


@pytest.mark.parametrize("n_slot", [1, 2, 4, 8])
def test_pack_noiseless_exact(conv, rng, n_slot):
    """Zero-mask inputs keep every key switch exact, so the packing is too."""
    p, keys, _ = conv
    n = p.n_poly
    ms = rng.integers(-1000, 1000, n_slot)
    packed = pack_lwes([ring_embed(trivial_lwe(int(m), p), p) for m in ms], keys)
    got = plain(packed, keys)
    assert got[:: n // n_slot].tolist() == (n_slot * ms).tolist()
    traced = plain(field_trace(packed, n_slot, keys), keys)
    stride = np.arange(n) % (n // n_slot) == 0
    assert not traced[~stride].any()
    assert traced[stride].tolist() == (n * ms).tolist()


def test_pack_two_coefficients(conv, rng):
    p, keys, _ = conv
    m0, m1 = 1111, -2222
    cts = [ring_embed(noiseless_lwe(m, keys.secret.coeffs, p, rng), p) for m in (m0, m1)]
    got = plain(pack_lwes(cts, keys), keys)
    noise = 2**16
    assert abs(got[0] - 2 * m0) < noise and abs(got[p.n_poly // 2] - 2 * m1) < noise


def test_pack_eight_noisy(conv, rng):
    p, keys, _ = conv
    n = p.n_poly
    ms = rng.integers(-(2**24), 2**24, 8)
    cts = [ring_embed(noiseless_lwe(int(m), keys.secret.coeffs, p, rng), p) for m in ms]
    got = plain(pack_lwes(cts, keys), keys)[:: n // 8]
    assert np.max(np.abs(got - 8 * ms)) < 2**18


def test_pack_count_must_be_power_of_two(conv):
    p, keys, _ = conv
    ct = ring_embed(trivial_lwe(0, p), p)
    with pytest.raises(ShapeError):
        pack_lwes([ct] * 3, keys)


# field trace ----------------------------------------------------------------------------

def test_trace_full_slots_identity(conv):
    p, keys, _ = conv
    ct = ring_embed(trivial_lwe(9, p), p)
    assert field_trace(ct, p.n_poly, keys) is ct


@pytest.mark.parametrize("n_slot", [1, 4, 16])
def test_trace_against_plaintext_automorphisms(conv, rng, n_slot):
    p, keys, _ = conv
    n, q = p.n_poly, q0(p)
    for pos in rng.choice(n, 6, replace=False):
        m = np.zeros(n, np.int64)
        m[pos] = int(rng.integers(1, 1000))
        pt = RnsPolynomial.from_ints(m, p.basis_at(0))
        ct = encrypt(pt, keys, p, trivial=True)
        got = plain(field_trace(ct, n_slot, keys), keys)
        oracle = pt.data[0]
        for g in trace_elements(n, n_slot):
            oracle = (oracle + apply_galois(oracle, g, q, Rep.COEFF)) % np.uint64(q)
        oracle = np.where(oracle > q // 2, oracle.astype(np.int64) - q, oracle.astype(np.int64))
        assert got.tolist() == oracle.tolist()
        want = np.zeros(n, np.int64)
        if pos % (n // n_slot) == 0:
            want[pos] = m[pos] * (n // n_slot)
        assert got.tolist() == want.tolist()


def test_trace_missing_keys():
    p = ckks_preset("toy")
    keys = keygen(p, 4)
    ct = ring_embed(trivial_lwe(1, p), p)
    with pytest.raises(KeyNotFound):
        field_trace(ct, 1, keys)


# full pipeline ---------------------------------------------------------------------------

def test_context_validation(conv):
    p, keys, _ = conv
    with pytest.raises(ShapeError):
        ConversionContext(p, keys, 3, 1.0)
    with pytest.raises(SlotOverflow):
        ConversionContext(p, keys, 2 * p.n_poly, 1.0)
    ctx = ConversionContext.create(p, keys, 4)
    assert ctx.stride == p.n_poly // 4


def test_lwes_to_ckks_zero(conv):
    p, keys, _ = conv
    ctx = ConversionContext.create(p, keys, 1)
    out = lwes_to_ckks([trivial_lwe(0, p)], ctx)
    assert not out.a.data.any() and not out.b.data.any()


def test_lwes_to_ckks_count(conv):
    _, _, ctx = conv
    with pytest.raises(ShapeError):
        lwes_to_ckks([trivial_lwe(0, ctx.params)] * 3, ctx)


@pytest.mark.parametrize("n_slot", [1, 2, 8, 32])
def test_round_trip_toy(conv, rng, n_slot):
    p, keys, _ = conv
    ctx = ConversionContext.create(p, keys, n_slot)
    v = rng.uniform(-1, 1, n_slot)
    out = round_trip(v, ctx, keys.secret, rng)
    assert np.max(np.abs(out - v)) / max(1.0, np.max(np.abs(v))) < 2**-10


def test_round_trip_batched_and_list_agree(conv, rng):
    p, keys, ctx = conv
    ct = encrypt_coeffs(rng.uniform(-1, 1, ctx.n_slot), ctx, keys.secret, rng)
    batch = ckks_to_lwe_batch(ct, ctx.n_slot)
    a = lwes_to_ckks(batch, ctx)
    b = lwes_to_ckks(ckks_to_lwes(ct, ctx.n_slot), ctx)
    assert a.a == b.a and a.b == b.b
    assert np.allclose(decode_packed(a, ctx, keys), decode_packed(b, ctx, keys))

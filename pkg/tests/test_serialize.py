import struct

import numpy as np
import pytest

from mmfhe import serialize
from mmfhe.ckks import ckks_preset, decode, decrypt, encode, encrypt
from mmfhe.ckks.scheme import RlweCiphertext
from mmfhe.errors import FormatError
from mmfhe.tfhe import GgswCiphertext, GlweCiphertext, ggsw_encrypt, glwe_encrypt, lwe_encrypt, tfhe_preset


def test_ckks_ciphertext_round_trip(toy_ckks, rng, tmp_path):
    p, keys = toy_ckks
    v = rng.uniform(-1, 1, p.slots)
    ct = encrypt(encode(v, p, level=1), keys, p, rng)
    path = tmp_path / "ct.bin"
    serialize.save(path, ct, p)
    back = serialize.load(path, p)
    assert isinstance(back, RlweCiphertext)
    assert back.a == ct.a and back.b == ct.b and back.scale == ct.scale and back.level == 1
    assert np.allclose(decode(decrypt(back, keys), p), v, atol=2**-15)


def test_ckks_polynomial_and_key(toy_ckks):
    p, keys = toy_ckks
    pt = encode([1.0, 2.0], p)
    back = serialize.loads(serialize.dumps(pt, p), p)
    assert back == pt and back.scale == pt.scale
    evk = serialize.loads(serialize.dumps(keys.relin, p), p)
    assert all(x == y for x, y in zip(evk.b, keys.relin.b))
    assert all(x == y for x, y in zip(evk.a, keys.relin.a))


def test_tfhe_objects(toy_tfhe, rng):
    p, sk, _ = toy_tfhe
    lwe = lwe_encrypt(rng.integers(0, 2, 5), sk, p, rng)
    assert serialize.loads(serialize.dumps(lwe, p), p) == lwe
    glwe = glwe_encrypt(rng.integers(0, 100, p.n_poly), sk, p, rng)
    back = serialize.loads(serialize.dumps(glwe, p), p)
    assert isinstance(back, GlweCiphertext) and np.array_equal(back.data, glwe.data)
    g = ggsw_encrypt(1, sk, p, rng)
    back = serialize.loads(serialize.dumps(g, p), p)
    assert isinstance(back, GgswCiphertext) and np.array_equal(back.data, g.data)


def test_header_layout(toy_ckks, rng):
    p, keys = toy_ckks
    blob = serialize.dumps(encode([1.0], p), p)
    magic, version, tag, phash, level, scale, rep, ndim = struct.unpack_from("<4sHH16sixxxxdBB", blob)
    assert magic == b"MMFH" and version == serialize.VERSION
    assert tag == serialize.TAGS["ckks.polynomial"]
    assert phash == p.params_hash() and level == p.levels and scale == p.scale and ndim == 2


def test_wrong_params_rejected(toy_ckks, toy_tfhe):
    p, keys = toy_ckks
    blob = serialize.dumps(encode([1.0], p), p)
    with pytest.raises(FormatError):
        serialize.loads(blob, ckks_preset("desk"))
    with pytest.raises(FormatError):
        serialize.loads(blob, tfhe_preset("toy"))


@pytest.mark.parametrize("mangle", [
    lambda b: b[:10],
    lambda b: b"XXXX" + b[4:],
    lambda b: b[:4] + struct.pack("<H", 99) + b[6:],
    lambda b: b[:6] + struct.pack("<H", 200) + b[8:],
    lambda b: b[:-8],
    lambda b: b + b"\0" * 8,
])
def test_malformed(toy_ckks, mangle):
    p, _ = toy_ckks
    with pytest.raises(FormatError):
        serialize.loads(mangle(serialize.dumps(encode([1.0], p), p)), p)


def test_unsupported_object(toy_ckks):
    p, _ = toy_ckks
    with pytest.raises(FormatError):
        serialize.dumps(object(), p)


def test_tfhe_blob_needs_tfhe_params(toy_tfhe, toy_ckks, rng):
    p, sk, _ = toy_tfhe
    blob = serialize.dumps(lwe_encrypt(1, sk, p, rng), p)
    with pytest.raises(FormatError):
        serialize.loads(blob, toy_ckks[0])

"""Versioned binary container for ciphertexts and keys.

Layout (all little-endian)::

    magic      4s   b"MMFH"
    version    u16
    type tag   u16  see TAGS
    params     16s  params_hash() of the parameter set
    level      i32  CKKS level, 0 for TFHE objects (then 4 pad bytes)
    scale      f64  CKKS scale, 0.0 when not applicable
    rep        u8   0 = coefficient, 1 = evaluation
    ndim       u8
    shape      ndim x u64
    payload    prod(shape) x u64 residues

Loading needs the parameter set; a hash mismatch is a FormatError rather
than a silent reinterpretation of residues under the wrong moduli.
"""
from __future__ import annotations

import struct
from os import PathLike

import numpy as np

from .ckks.params import CkksParams
from .ckks.rns import RnsPolynomial
from .ckks.scheme import EvaluationKey, RlweCiphertext
from .errors import FormatError
from .polyring import Rep
from .tfhe import GgswCiphertext, GlweCiphertext, LweCiphertext, TfheParams

MAGIC = b"MMFH"
VERSION = 1
TAGS = {
    "ckks.ciphertext": 1,
    "ckks.polynomial": 2,
    "ckks.evaluation_key": 3,
    "tfhe.lwe": 16,
    "tfhe.glwe": 17,
    "tfhe.ggsw": 18,
}
_NAMES = {v: k for k, v in TAGS.items()}
# i32 level is followed by a 4-byte pad so the f64 scale is aligned
_HEAD = struct.Struct("<4sHH16sixxxxdBB")


def _pack(tag: str, params, level: int, scale: float, rep: Rep, arr: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(arr, dtype="<u8")
    head = _HEAD.pack(MAGIC, VERSION, TAGS[tag], params.params_hash(), level, float(scale),
                      1 if rep == Rep.EVAL else 0, arr.ndim)
    return head + struct.pack(f"<{arr.ndim}Q", *arr.shape) + arr.tobytes()


def _unpack(blob: bytes, params):
    if len(blob) < _HEAD.size:
        raise FormatError("truncated header")
    magic, version, tag, phash, level, scale, rep, ndim = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported container version {version}")
    if tag not in _NAMES:
        raise FormatError(f"unknown type tag {tag}")
    if phash != params.params_hash():
        raise FormatError("container was written under a different parameter set")
    off = _HEAD.size
    if len(blob) < off + 8 * ndim:
        raise FormatError("truncated shape")
    shape = struct.unpack_from(f"<{ndim}Q", blob, off)
    off += 8 * ndim
    count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
    if len(blob) != off + 8 * count:
        raise FormatError(f"payload holds {len(blob) - off} bytes, shape {shape} needs {8 * count}")
    arr = np.frombuffer(blob, dtype="<u8", count=count, offset=off).astype(np.uint64).reshape(shape)
    return _NAMES[tag], level, scale, Rep.EVAL if rep else Rep.COEFF, arr


def dumps(obj, params: CkksParams | TfheParams) -> bytes:
    if isinstance(obj, RlweCiphertext):
        return _pack("ckks.ciphertext", params, obj.level, obj.scale, obj.b.rep, np.stack([obj.b.data, obj.a.data]))
    if isinstance(obj, RnsPolynomial):
        return _pack("ckks.polynomial", params, obj.level, obj.scale or 0.0, obj.rep, obj.data)
    if isinstance(obj, EvaluationKey):
        arr = np.stack([np.stack([b.data, a.data]) for b, a in zip(obj.b, obj.a)])
        return _pack("ckks.evaluation_key", params, obj.b[0].limbs - 1, 0.0, obj.b[0].rep, arr)
    if isinstance(obj, LweCiphertext):
        return _pack("tfhe.lwe", params, 0, 0.0, Rep.COEFF, np.concatenate([obj.a, obj.b[..., None]], axis=-1))
    if isinstance(obj, GlweCiphertext):
        return _pack("tfhe.glwe", params, 0, 0.0, obj.rep, obj.data)
    if isinstance(obj, GgswCiphertext):
        return _pack("tfhe.ggsw", params, 0, 0.0, Rep.EVAL, obj.data)
    raise FormatError(f"cannot serialize {type(obj).__name__}")


def _ckks_basis(params, level: int, limbs: int):
    if not isinstance(params, CkksParams):
        raise FormatError("CKKS object needs CKKS parameters")
    if limbs == level + 1 and level <= params.levels:
        return params.basis_at(level)
    full = params.full_basis
    if limbs == len(full):
        return full
    raise FormatError(f"{limbs} limbs do not fit level {level}")


def loads(blob: bytes, params: CkksParams | TfheParams):
    tag, level, scale, rep, arr = _unpack(bytes(blob), params)
    if tag == "ckks.ciphertext":
        if arr.ndim != 3 or arr.shape[0] != 2:
            raise FormatError("ciphertext payload must be (2, limbs, N)")
        basis = _ckks_basis(params, level, arr.shape[1])
        return RlweCiphertext(RnsPolynomial(arr[1], basis, rep), RnsPolynomial(arr[0], basis, rep), scale)
    if tag == "ckks.polynomial":
        if arr.ndim != 2:
            raise FormatError("polynomial payload must be (limbs, N)")
        return RnsPolynomial(arr, _ckks_basis(params, level, arr.shape[0]), rep, scale or None)
    if tag == "ckks.evaluation_key":
        if arr.ndim != 4 or arr.shape[1] != 2:
            raise FormatError("evaluation key payload must be (rows, 2, limbs, N)")
        basis = _ckks_basis(params, level, arr.shape[2])
        return EvaluationKey(tuple(RnsPolynomial(r[0], basis, rep) for r in arr),
                             tuple(RnsPolynomial(r[1], basis, rep) for r in arr))
    if not isinstance(params, TfheParams):
        raise FormatError("TFHE object needs TFHE parameters")
    if tag == "tfhe.lwe":
        return LweCiphertext(arr[..., :-1].copy(), arr[..., -1].copy(), params.q)
    if tag == "tfhe.glwe":
        return GlweCiphertext(arr, params.modulus, rep)
    return GgswCiphertext(arr, params.modulus, params.l_b, params.log_base_b)


def save(path: str | PathLike, obj, params) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(obj, params))


def load(path: str | PathLike, params):
    with open(path, "rb") as fh:
        return loads(fh.read(), params)

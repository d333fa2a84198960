"""RNS-CKKS built from the NTT, BConv, IP, ModMul, ModAdd and Auto kernels."""
from .encoder import decode, decode_coeffs, encode, encode_coeffs
from .params import PRESETS, CkksParams, ckks_preset, make_ckks_params
from .rns import RnsPolynomial, bconv, rescale_poly
from .scheme import (
    EvaluationKey,
    KeySet,
    PublicKey,
    RlweCiphertext,
    SecretKey,
    add_galois_key,
    apply_galois,
    decrypt,
    drop_level,
    encrypt,
    gen_switch_key,
    hadd,
    hmult,
    hrotate,
    hsub,
    hybrid_keyswitch,
    keygen,
    padd,
    pmult,
    rescale,
)

__all__ = [
    "CkksParams", "EvaluationKey", "KeySet", "PRESETS", "PublicKey", "RlweCiphertext", "RnsPolynomial",
    "SecretKey", "add_galois_key", "apply_galois", "bconv", "ckks_preset", "decode", "decode_coeffs",
    "decrypt", "drop_level", "encode", "encode_coeffs", "encrypt", "gen_switch_key", "hadd", "hmult",
    "hrotate", "hsub", "hybrid_keyswitch", "keygen", "make_ckks_params", "padd", "pmult", "rescale",
    "rescale_poly",
]

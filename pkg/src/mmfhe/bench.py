"""Workloads behind the CLI subcommands and the acceptance suite.

Every function returns a :class:`Report`.  Randomness comes from generators
derived from (seed, tag), so each trial stream is reproducible on its own and
no report depends on how the work was ordered or timed.
"""
from __future__ import annotations

import hashlib
import zlib
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import ckks as C
from . import tfhe as T
from .archsim import HardwareConfig, preset_config
from .archsim import scenarios as S
from .archsim.report import trace_csv, trace_summary
from .convert import ConversionContext, field_trace, round_trip
from .modmath import Modulus, find_ntt_prime
from .polyring import NttTables, Rep, RingPolynomial, four_step_ntt, ntt_forward, ntt_inverse, poly_mul
from .reporting import Check, Report

KERNEL_SIZES = (8, 16, 64, 256)
FOUR_STEP_MAX_LOG = 16
CKKS_TOLERANCE = 2.0**-10
CONVERT_TOLERANCE = 2.0**-10
CONVERT_SLOTS = (2, 8, 32)
ROTATIONS = (1, 2, -1, 7)


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Independent generator for one (seed, tag...) stream."""
    words = [int(seed)] + [t if isinstance(t, int) else zlib.crc32(str(t).encode()) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(words))


def _hash_of(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p if isinstance(p, bytes) else str(p).encode())
    return h.hexdigest()[:32]


# kernels ------------------------------------------------------------------------------

def schoolbook_negacyclic(a, b, q: int) -> list[int]:
    """O(N^2) product in Z_q[X]/(X^N + 1) over Python integers."""
    n = len(a)
    out = [0] * n
    for i, x in enumerate(int(v) for v in a):
        if not x:
            continue
        for j, y in enumerate(int(v) for v in b):
            k = i + j
            if k < n:
                out[k] += x * y
            else:
                out[k - n] -= x * y
    return [v % q for v in out]


def _kernel_moduli(n: int) -> list[Modulus]:
    return [find_ntt_prime(30, 2 * n), find_ntt_prime(36, 2 * n)]


def kernel_report(seed: int = 0, sizes=KERNEL_SIZES, trials: int = 4, four_step_max_log: int = FOUR_STEP_MAX_LOG) -> Report:
    rows = []
    moduli = []
    for n in sizes:
        for m in _kernel_moduli(n):
            moduli.append(m.value)
            t = NttTables.create(m, n)
            rng = rng_for(seed, "kernels", n, m.value)
            rt = conv = 0
            for _ in range(trials):
                a = RingPolynomial(rng.integers(0, m.value, n, dtype=np.uint64), m)
                b = RingPolynomial(rng.integers(0, m.value, n, dtype=np.uint64), m)
                rt += ntt_inverse(ntt_forward(a, t), t) != a
                got = poly_mul(a, b).coeffs.tolist()
                conv += got != schoolbook_negacyclic(a.coeffs, b.coeffs, m.value)
            rows.append(("ntt_roundtrip", n, m.value, trials, int(rt)))
            rows.append(("convolution", n, m.value, trials, int(conv)))
    for lg in range(2, four_step_max_log + 1):
        n = 1 << lg
        m = find_ntt_prime(36, 2 * n)
        moduli.append(m.value)
        n1 = 1 << (lg // 2)
        t, t1, t2 = NttTables.create(m, n), NttTables.create(m, n1), NttTables.create(m, n // n1)
        a = RingPolynomial(rng_for(seed, "four_step", n).integers(0, m.value, n, dtype=np.uint64), m)
        ref = ntt_forward(a, t)
        for mode in ("on_the_fly", "table"):
            rows.append((f"four_step_{mode}", n, m.value, 1, int(four_step_ntt(a, t1, t2, mode) != ref)))
    exact = [r for r in rows if r[0] in ("ntt_roundtrip", "convolution")]
    four = [r for r in rows if r[0].startswith("four_step")]
    checks = [
        Check("ntt_roundtrip_and_convolution_exact", all(r[4] == 0 for r in exact),
              sum(r[4] for r in exact), "0 mismatches"),
        Check("four_step_equals_ntt_forward", all(r[4] == 0 for r in four), sum(r[4] for r in four), "0 mismatches"),
    ]
    return Report("kernels", seed, _hash_of("kernels", *moduli),
                  ("check", "n", "modulus", "trials", "mismatches"), rows, checks)


# CKKS --------------------------------------------------------------------------------

@dataclass
class _Val:
    ct: C.RlweCiphertext
    plain: np.ndarray


def _rel_error(got: np.ndarray, want: np.ndarray) -> float:
    return float(np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 1e-300))


def random_circuit(params: C.CkksParams, keys: C.KeySet, rng: np.random.Generator, width: int = 2,
                   max_depth: int = 2) -> tuple[str, int, list[_Val]]:
    """Random layered circuit over {HAdd, PMult, HMult+Rescale, HRotate}.

    Each layer is a linear step (HAdd / HRotate / pass-through on every wire)
    and, while depth remains, a multiplicative step (HMult or PMult on every
    wire, then Rescale).  Wires in a layer share level and scale, so every
    operand pair is compatible.
    """
    depth = int(rng.integers(0, max_depth + 1))
    slots = params.slots
    wires = []
    for _ in range(width):
        v = rng.uniform(-1, 1, slots) + 1j * rng.uniform(-1, 1, slots)
        wires.append(_Val(C.encrypt(C.encode(v, params), keys, params, rng), v))
    trace = []

    def linear():
        nonlocal wires
        out = []
        for i, w in enumerate(wires):
            op = ("add", "rot", "id")[int(rng.integers(0, 3))]
            if op == "add":
                o = wires[int(rng.integers(0, width))]
                out.append(_Val(C.hadd(w.ct, o.ct), w.plain + o.plain))
            elif op == "rot":
                r = ROTATIONS[int(rng.integers(0, len(ROTATIONS)))]
                out.append(_Val(C.hrotate(w.ct, r, keys), np.roll(w.plain, -r)))
                op = f"rot{r}"
            else:
                out.append(w)
            trace.append(op)
        wires = out

    for _ in range(depth):
        linear()
        out = []
        for w in wires:
            if rng.integers(0, 2):
                o = wires[int(rng.integers(0, width))]
                prod = _Val(C.hmult(w.ct, o.ct, keys), w.plain * o.plain)
                trace.append("hmult")
            else:
                v = rng.uniform(-1, 1, slots)
                pt = C.encode(v, params, target_scale=w.ct.scale, level=w.ct.level)
                prod = _Val(C.pmult(w.ct, pt), w.plain * v)
                trace.append("pmult")
            out.append(_Val(C.rescale(prod.ct), prod.plain))
        wires = out
    linear()
    return " ".join(trace), depth, wires


def ckks_report(seed: int = 0, set_name: str = "desk", circuits: int = 50) -> Report:
    params = C.ckks_preset(set_name)
    keys = C.keygen(params, rng_for(seed, "ckks-keys"), rotations=ROTATIONS)
    rows = []
    for i in range(circuits):
        ops, depth, wires = random_circuit(params, keys, rng_for(seed, "circuit", i))
        err = max(_rel_error(C.decode(C.decrypt(w.ct, keys), params), w.plain) for w in wires)
        rows.append((i, depth, ops, err, float(np.log2(err)) if err > 0 else -1074.0))
    worst = max((r[3] for r in rows), default=0.0)
    checks = [Check(f"ckks_{set_name}_circuits_rel_error", worst <= CKKS_TOLERANCE, worst, "<= 2^-10")]
    return Report("ckks-bench", seed, params.params_hash().hex(),
                  ("circuit", "depth", "ops", "max_rel_error", "log2_error"), rows, checks)


# TFHE --------------------------------------------------------------------------------

NAND_ROWS = ((0, 0), (0, 1), (1, 0), (1, 1))


def tfhe_report(seed: int = 0, set_name: str = "Set-I", trials: int = 1000, gate_trials: int = 400) -> Report:
    params = T.tfhe_preset(set_name)
    sk, keys = T.tfhe_keygen(params, rng_for(seed, "tfhe-keys"))
    rng = rng_for(seed, "pbs-identity")
    m = rng.integers(0, 2, trials)
    out = T.pbs_batched(T.lwe_encrypt(m, sk, params, rng), lambda x: x, keys, params) if trials else None
    ok = int(np.sum(T.lwe_decrypt(out, sk, params) == m)) if trials else 0
    rows = [("pbs_identity", "-", trials, ok, ok / trials if trials else 0.0)]
    gp = T.gate_params(params)
    per_row = gate_trials // len(NAND_ROWS)
    gate_ok = gate_total = 0
    for x, y in NAND_ROWS:
        grng = rng_for(seed, "nand", x, y)
        a = np.full(per_row, x)
        b = np.full(per_row, y)
        res = T.nand(T.lwe_encrypt(a, sk, gp, grng), T.lwe_encrypt(b, sk, gp, grng), keys, params) if per_row else None
        good = int(np.sum(T.lwe_decrypt(res, sk, gp) == 1 - (x & y))) if per_row else 0
        gate_ok += good
        gate_total += per_row
        rows.append(("nand", f"{x}{y}", per_row, good, good / per_row if per_row else 0.0))
    rate = ok / trials if trials else 0.0
    checks = [
        Check(f"pbs_identity_{set_name}", trials > 0 and ok * 1000 >= 999 * trials, rate, ">= 0.999"),
        Check(f"nand_truth_table_{set_name}", gate_total > 0 and gate_ok == gate_total,
              gate_ok / gate_total if gate_total else 0.0, "== 1"),
    ]
    return Report("tfhe-bench", seed, params.params_hash().hex(),
                  ("test", "input", "trials", "correct", "rate"), rows, checks)


# conversion ----------------------------------------------------------------------------

def trace_annihilation(params: C.CkksParams, keys: C.KeySet, n_slot: int, rng: np.random.Generator) -> tuple[int, int]:
    """Field trace of a noiseless (zero-mask) ciphertext of a random level-0
    polynomial.  Returns (off-stride coefficients left nonzero, stride
    coefficients that differ from N/n_slot times the input)."""
    n = params.n_poly
    basis = params.basis_at(0)
    q = basis.values[0]
    coeffs = rng.integers(0, q, n, dtype=np.uint64)
    pt = C.RnsPolynomial(coeffs[None], basis, Rep.COEFF)
    ct = C.encrypt(pt, keys, params, trivial=True, scale=1.0)
    out = C.decrypt(field_trace(ct, n_slot, keys, params), keys).to_rep(Rep.COEFF).data[0]
    stride = n // n_slot
    mask = np.zeros(n, dtype=bool)
    mask[::stride] = True
    left = int(np.count_nonzero(out[~mask]))
    want = [int(c) * stride % q for c in coeffs[mask]]
    wrong = sum(int(g) != w for g, w in zip(out[mask], want))
    return left, wrong


def convert_report(seed: int = 0, set_name: str = "desk", slots=CONVERT_SLOTS) -> Report:
    params = C.ckks_preset(set_name)
    keys = C.keygen(params, rng_for(seed, "convert-keys"))
    rows = []
    worst = 0.0
    leftover = 0
    for ns in slots:
        ctx = ConversionContext.create(params, keys, ns, rng=rng_for(seed, "galois", ns))
        v = rng_for(seed, "values", ns).uniform(-1, 1, ns)
        out = round_trip(v, ctx, keys.secret, rng=rng_for(seed, "encrypt", ns))
        err = _rel_error(out, v)
        worst = max(worst, err)
        left, wrong = trace_annihilation(params, keys, ns, rng_for(seed, "trace", ns))
        leftover += left + wrong
        rows.append((ns, ctx.stride, err, float(np.log2(err)) if err > 0 else -1074.0, left, wrong))
    checks = [
        Check(f"conversion_round_trip_{set_name}", worst <= CONVERT_TOLERANCE, worst, "<= 2^-10"),
        Check("field_trace_annihilation", leftover == 0, leftover, "0 nonzero off-stride, 0 wrong on-stride"),
    ]
    return Report("convert-bench", seed, params.params_hash().hex(),
                  ("n_slot", "stride", "max_rel_error", "log2_error", "offstride_nonzero", "stride_mismatch"),
                  rows, checks)


# architecture model ---------------------------------------------------------------------

def ntt_util_report(config: HardwareConfig, seed: int = 0) -> Report:
    rows = S.ntt_sweep_rows(config)
    by: dict[str, dict[int, float]] = {}
    for s, n, u in rows:
        by.setdefault(s, {})[n] = u
    sizes = sorted({n for _, n, _ in rows})
    f1 = [by["F1Like"][n] for n in sizes]
    fab = [by["FABLike"][n] for n in sizes]
    tri = [by["Hetero"][n] for n in sizes]
    mean = S.ntt_mean_improvement(config)
    checks = [
        Check("f1_like_peak_at_largest_and_monotone",
              f1[-1] == max(f1) and all(a <= b for a, b in zip(f1, f1[1:])), f1[-1], "peak at N=2^16"),
        Check("fab_like_peak_at_smallest_and_monotone",
              fab[0] == max(fab) and all(a >= b for a, b in zip(fab, fab[1:])), fab[0], "peak at N=2^8"),
        Check("hetero_dominates", all(t >= max(a, b) for t, a, b in zip(tri, f1, fab)),
              min(t - max(a, b) for t, a, b in zip(tri, f1, fab)), ">= 0 margin"),
        Check("hetero_mean_improvement", mean >= 1.1, mean, ">= 1.1"),
    ]
    return Report("ntt-util", seed, config.config_hash(), ("strategy", "n", "utilization"),
                  [tuple(r) for r in rows], checks)


BREAKDOWN_OPS = ("all", "keyswitch", "pbs")
KEYSWITCH_TARGET = 0.592
PBS_TARGET = 0.755
BREAKDOWN_TOL = 0.05


def breakdown_report(op: str = "all", levels: int = 23, dnum: int = 3, seed: int = 0) -> Report:
    if op not in BREAKDOWN_OPS:
        raise ValueError(f"unknown breakdown op {op!r}")
    rows = S.breakdown_rows(levels, dnum)
    if op == "keyswitch":
        rows = rows[:1]
    elif op == "pbs":
        rows = rows[1:]
    checks = []
    for r in rows:
        if r.workload.startswith("CKKS KeySwitch") and (levels, dnum) == (23, 3):
            checks.append(Check("keyswitch_ntt_fraction", abs(r.ntt_fraction - KEYSWITCH_TARGET) <= BREAKDOWN_TOL,
                                r.ntt_fraction, "0.592 +- 0.05"))
        if r.workload == "TFHE PBS average":
            checks.append(Check("pbs_average_ntt_fraction", abs(r.ntt_fraction - PBS_TARGET) <= BREAKDOWN_TOL,
                                r.ntt_fraction, "0.755 +- 0.05"))
    return Report("breakdown", seed, _hash_of("breakdown", op, levels, dnum, *S.TFHE_SETS.values()),
                  ("workload", "ntt_fraction", "mac_fraction", "other_fraction"),
                  [(r.workload, r.ntt_fraction, r.mac_fraction, r.other_fraction) for r in rows], checks)


SIM_WORKLOADS = ("pbs", "ckks", "cu-compare", "scaling")
SIM_COLUMNS = ("workload", "config", "clusters", "operations", "cycles", "ops_per_second", "utilization")
CU_THROUGHPUT_RANGE = (1.5, 2.1)
CU_UTIL_TARGET = 1.45
CU_UTIL_TOL = 0.15
CKKS_UTIL_FLOOR = 0.48


def _row(r: S.SimResult) -> tuple:
    return (r.workload, r.config, r.clusters, r.operations, r.cycles, r.ops_per_second, r.utilization)


@dataclass
class SimOutput:
    report: Report
    trace_csv: str | None = None
    summary: dict | None = None


def simulate_report(config: HardwareConfig, workload: str = "pbs", set_name: str = "Set-I",
                    streams: int | None = None, rounds: int | None = None, seed: int = 0) -> SimOutput:
    """`pbs` and `ckks` run one workload on `config` and also return its trace;
    `cu-compare` and `scaling` are the fixed comparisons (CU presets, and
    `config` against its one-cluster cut)."""
    checks = []
    trace = None
    if workload == "pbs":
        res, trace = S.run_ops(f"PBS {set_name}", S.pbs_ops(config, streams or 8, rounds or 2),
                               S.tfhe_dims(set_name), config)
        rows = [_row(res)]
        phash = _hash_of(config.config_hash(), workload, set_name, streams, rounds)
    elif workload == "ckks":
        res, trace = S.run_ops("CKKS mult/rotate", S.ckks_ops(23, streams or 4, rounds or 2),
                               S.KEYSWITCH_DIMS, config)
        rows = [_row(res)]
        checks.append(Check("ckks_utilization", res.utilization >= CKKS_UTIL_FLOOR, res.utilization, ">= 0.48"))
        phash = _hash_of(config.config_hash(), workload, streams, rounds)
    elif workload == "cu-compare":
        rows = []
        tp, ut = [], []
        cfgs = (preset_config("tfhe-wcu"), preset_config("tfhe-wocu"))
        for name in S.TFHE_SETS:
            w, wo = S.cu_comparison(name, streams or 8, rounds or 2)
            rows += [_row(w), _row(wo)]
            tp.append(w.ops_per_second / wo.ops_per_second)
            ut.append(w.utilization / wo.utilization)
        lo, hi = CU_THROUGHPUT_RANGE
        for name, r in zip(S.TFHE_SETS, tp):
            checks.append(Check(f"cu_throughput_ratio_{name}", lo <= r <= hi, r, "in [1.5, 2.1]"))
        mean_ut = sum(ut) / len(ut)
        checks.append(Check("cu_utilization_ratio_mean", abs(mean_ut - CU_UTIL_TARGET) <= CU_UTIL_TOL,
                            mean_ut, "1.45 +- 0.15"))
        phash = _hash_of(*(c.config_hash() for c in cfgs), workload, streams, rounds)
    elif workload == "scaling":
        full, one = S.cluster_scaling(set_name, streams or 1, rounds or 1, config)
        rows = [_row(full), _row(one)]
        # exact rational ratio of throughputs, not a float quotient
        ratio = Fraction(full.operations * one.cycles, one.operations * full.cycles)
        checks.append(Check("cluster_scaling", ratio == config.n_clusters, float(ratio), f"== {config.n_clusters}"))
        phash = _hash_of(config.config_hash(), workload, set_name, streams, rounds)
    else:
        raise ValueError(f"unknown workload {workload!r}")
    report = Report("simulate", seed, phash, SIM_COLUMNS, rows, checks)
    if trace is None:
        return SimOutput(report)
    return SimOutput(report, trace_csv(trace), trace_summary(trace))

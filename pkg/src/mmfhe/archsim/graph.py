"""Kernel graphs: FHE operations expanded into the accelerator's kernels.

Node granularity follows the data layout.  Limb-wise kernels (NTT, iNTT,
element-wise work, automorphisms) get one node per RNS limb, placed on cluster
``limb % clusters``.  Slot-wise kernels (BConv, key inner product) get one
node per cluster, each covering N/clusters coefficients of every limb.  A
switch between the two layouts is one NoC transfer node per cluster.  TFHE
work is limb-wise throughout and a PBS stream lives on one cluster.

Every node carries ``mults``, its scalar modular multiply count, which is
what the breakdown report sums: N/2 * log2 N per limb-NTT, one per MAC, one
per element-wise product.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import UnsupportedOp

KINDS = ("NTT", "iNTT", "MAC", "Auto", "Elementwise", "Transpose", "Rotate", "Decompose",
         "NoCTransfer", "HbmTransfer")


@dataclass(frozen=True)
class CkksDims:
    n: int
    levels: int
    dnum: int
    special: int | None = None

    @property
    def alpha(self) -> int:
        return -(-(self.levels + 1) // self.dnum)

    @property
    def k(self) -> int:
        return self.alpha if self.special is None else self.special

    def digits(self, level: int) -> list[int]:
        """Limb count of each key-switching digit at `level`."""
        limbs, a = level + 1, self.alpha
        return [min(a, limbs - s) for s in range(0, limbs, a)]

    @classmethod
    def from_params(cls, p) -> "CkksDims":
        return cls(p.n_poly, p.levels, p.dnum, len(p.special_basis))


@dataclass(frozen=True)
class TfheDims:
    n_poly: int
    n_lwe: int
    k: int
    l_b: int
    l_k: int

    @classmethod
    def from_params(cls, p) -> "TfheDims":
        return cls(p.n_poly, p.n_lwe, p.glwe_dim, p.l_b, p.l_k)


@dataclass(frozen=True)
class Op:
    name: str
    level: int | None = None
    stream: int = 0
    n_slot: int = 1


@dataclass(slots=True)
class KernelNode:
    id: int
    kind: str
    scheme: str
    n: int  # polynomial length (or vector length)
    work: int  # elements (or MACs for MAC nodes) the unit must stream
    mults: int
    deps: tuple[int, ...]
    cluster: int = 0
    detail: str = ""
    limbs: int = 1
    nbytes: int = 0


@dataclass
class KernelGraph:
    nodes: list[KernelNode] = field(default_factory=list)
    clusters: int = 1

    def add(self, kind: str, scheme: str, n: int, work: int, mults: int, deps: Iterable[int] = (),
            cluster: int = 0, detail: str = "", limbs: int = 1, nbytes: int = 0) -> int:
        if kind not in KINDS:
            raise UnsupportedOp(f"unknown kernel kind {kind!r}")
        nid = len(self.nodes)
        d = tuple(sorted(set(deps)))
        if d and (d[0] < 0 or d[-1] >= nid):
            raise ValueError("dependencies must refer to earlier nodes")
        self.nodes.append(KernelNode(nid, kind, scheme, n, int(work), int(mults), d, cluster, detail, limbs,
                                     int(nbytes)))
        return nid

    def __len__(self) -> int:
        return len(self.nodes)

    def counts(self) -> Counter:
        return Counter(n.kind for n in self.nodes)

    def detail_counts(self) -> Counter:
        return Counter((n.kind, n.detail) for n in self.nodes)

    def sinks(self) -> list[int]:
        used = {d for n in self.nodes for d in n.deps}
        return [n.id for n in self.nodes if n.id not in used]


def _ntt_mults(n: int) -> int:
    return (n // 2) * (n.bit_length() - 1)


class _Builder:
    def __init__(self, graph: KernelGraph, word_bytes: float):
        self.g = graph
        self.C = graph.clusters
        self.wb = word_bytes

    # limb-wise helpers ----------------------------------------------------
    def ntt(self, kind: str, scheme: str, n: int, count: int, deps, first_limb: int = 0,
            cluster: int | None = None, detail: str = "") -> list[int]:
        return [self.g.add(kind, scheme, n, n, _ntt_mults(n), deps,
                           (first_limb + i) % self.C if cluster is None else cluster, detail)
                for i in range(count)]

    def ewise(self, scheme: str, n: int, limbs: int, polys: int, mults_per: int, deps, detail: str,
              cluster: int | None = None) -> list[int]:
        """Element-wise work over `polys` polynomials of `limbs` limbs, split by cluster."""
        if cluster is not None:
            return [self.g.add("Elementwise", scheme, n, polys * limbs * n, mults_per * polys * limbs * n,
                               deps, cluster, detail, limbs)]
        out = []
        for c in range(min(self.C, limbs)):
            own = len(range(c, limbs, self.C))
            out.append(self.g.add("Elementwise", scheme, n, polys * own * n, mults_per * polys * own * n,
                                  deps, c, detail, own))
        return out

    def switch(self, scheme: str, n: int, limbs: int, deps, detail: str) -> list[int]:
        """All-to-all layout change; one NoC node per cluster (none on one cluster)."""
        if self.C == 1:
            return list(deps)
        moved = limbs * n * (self.C - 1) / self.C / self.C
        nbytes = math.ceil(moved * self.wb)
        return [self.g.add("NoCTransfer", scheme, n, 0, 0, deps, c, detail, limbs, nbytes)
                for c in range(self.C)]

    def slotwise_mac(self, scheme: str, n: int, macs_per_coeff: int, deps, detail: str) -> list[int]:
        out = []
        for c in range(self.C):
            share = n // self.C + (1 if c < n % self.C else 0)
            w = macs_per_coeff * share
            out.append(self.g.add("MAC", scheme, n, w, w, deps, c, detail))
        return out

    # CKKS -------------------------------------------------------------------
    def keyswitch(self, dims: CkksDims, level: int, deps, scheme: str = "CKKS") -> list[int]:
        """Hybrid key switching with evaluation-rep input and output."""
        n, limbs, k = dims.n, level + 1, dims.k
        ext = limbs + k
        d_coeff = self.ntt("iNTT", scheme, n, limbs, deps, detail="ModUp")
        to_slot = self.switch(scheme, n, limbs, d_coeff, "ModUp")
        digit_out = []
        for alpha_i in dims.digits(level):
            conv = self.slotwise_mac(scheme, n, alpha_i * (ext - alpha_i), to_slot, "BConv")
            back = self.switch(scheme, n, ext - alpha_i, conv, "ModUp")
            digit_out += self.ntt("NTT", scheme, n, ext - alpha_i, back, detail="ModUp")
        beta = len(dims.digits(level))
        ip_in = self.switch(scheme, n, beta * ext, digit_out, "IP")
        ip = self.slotwise_mac(scheme, n, 2 * beta * ext, ip_in, "IP")
        ip_back = self.switch(scheme, n, 2 * ext, ip, "IP")
        acc_coeff = self.ntt("iNTT", scheme, n, 2 * ext, ip_back, detail="ModDown")
        md_in = self.switch(scheme, n, 2 * k, acc_coeff, "ModDown")
        md = self.slotwise_mac(scheme, n, 2 * k * limbs, md_in, "BConv")
        md_back = self.switch(scheme, n, 2 * limbs, md, "ModDown")
        fix = self.ewise(scheme, n, limbs, 2, 1, md_back, "ModDown")
        return self.ntt("NTT", scheme, n, 2 * limbs, fix, detail="ModDown")

    def ckks_op(self, dims: CkksDims, op: Op, deps) -> list[int]:
        n = dims.n
        level = dims.levels if op.level is None else op.level
        limbs = level + 1
        name = op.name
        if name in ("HAdd", "HSub", "PAdd"):
            return self.ewise("CKKS", n, limbs, 2 if name != "PAdd" else 1, 0, deps, name,
                              cluster=0 if self.C == 1 else None)
        if name == "PMult":
            return self.ewise("CKKS", n, limbs, 2, 1, deps, name, cluster=0 if self.C == 1 else None)
        if name == "HMult":
            tensor = self.ewise("CKKS", n, limbs, 4, 1, deps, "Tensor")
            ks = self.keyswitch(dims, level, tensor)
            return self.ewise("CKKS", n, limbs, 2, 0, ks, "Accumulate")
        if name == "HRotate":
            auto = [self.g.add("Auto", "CKKS", n, 2 * len(range(c, limbs, self.C)) * n, 0, deps, c, "HRotate")
                    for c in range(min(self.C, limbs))]
            ks = self.keyswitch(dims, level, auto)
            return self.ewise("CKKS", n, limbs, 1, 0, ks, "Accumulate")
        if name == "KeySwitch":
            return self.keyswitch(dims, level, deps)
        if name == "Rescale":
            if level < 1:
                raise UnsupportedOp("cannot rescale at level 0")
            top = self.ntt("iNTT", "CKKS", n, 2, deps, first_limb=level, detail="Rescale")
            spread = self.ntt("NTT", "CKKS", n, 2 * level, top, detail="Rescale")
            return self.ewise("CKKS", n, level, 2, 1, spread, "Rescale")
        if name == "Load":
            nbytes = math.ceil(2 * limbs * n * self.wb)
            return [self.g.add("HbmTransfer", "CKKS", n, 0, 0, deps, 0, "Load", 2 * limbs, nbytes)]
        raise UnsupportedOp(f"unsupported CKKS operation {name!r}")

    # TFHE -------------------------------------------------------------------
    def pbs(self, dims: TfheDims, deps, cluster: int) -> tuple[list[int], list[int]]:
        """Returns (result nodes, nodes after which the stream's accumulator
        is free again).  The LWE key switch runs off the accumulator, so the
        next bootstrap on the same stream may overlap it."""
        n, k, lb = dims.n_poly, dims.k, dims.l_b
        g = self.g
        prev = [g.add("Decompose", "TFHE", dims.n_lwe + 1, dims.n_lwe + 1, 0, deps, cluster, "ModSwitch")]
        for _ in range(dims.n_lwe):
            rot = g.add("Rotate", "TFHE", n, (k + 1) * n, 0, prev, cluster, "CMux")
            dec = g.add("Decompose", "TFHE", n, (k + 1) * n, 0, [rot], cluster, "Gadget")
            fw = self.ntt("NTT", "TFHE", n, (k + 1) * lb, [dec], cluster=cluster)
            macs = (k + 1) * (k + 1) * lb * n
            ep = g.add("MAC", "TFHE", n, macs, macs, fw, cluster, "ExtProd")
            inv = self.ntt("iNTT", "TFHE", n, k + 1, [ep], cluster=cluster)
            prev = [g.add("Elementwise", "TFHE", n, (k + 1) * n, 0, inv, cluster, "Accumulate")]
        ext = g.add("Rotate", "TFHE", k * n + 1, k * n + 1, 0, prev, cluster, "SampleExtract")
        # key switch streamed in tiles of 32 input coefficients per level so
        # it interleaves with other streams' external products
        tile = min(32, k * n)
        tiles = -(-k * n // tile) * dims.l_k
        macs = tile * (dims.n_lwe + 1)
        prev = [ext]
        for _ in range(tiles):
            prev = [g.add("MAC", "TFHE", k * n, macs, macs, prev, cluster, "LweKS")]
        return prev, [ext]

    # conversion -------------------------------------------------------------
    def conversion(self, dims: CkksDims, op: Op, deps) -> list[int]:
        n = dims.n
        g = self.g
        if op.name == "SampleExtract":
            return [g.add("Rotate", "Conversion", n, n + 1, 0, deps, i % self.C, "SampleExtract")
                    for i in range(op.n_slot)]
        if op.name == "RingEmbed":
            return [g.add("Rotate", "Conversion", n, n + 1, 0, deps, i % self.C, "RingEmbed")
                    for i in range(op.n_slot)]
        if op.name == "PackLWEs":
            return self._pack(dims, op.n_slot, deps)
        if op.name == "FieldTrace":
            cur = list(deps)
            for _ in range(int(math.log2(n // op.n_slot))):
                cur = self._hrotate_add(dims, cur)
            return cur
        raise UnsupportedOp(f"unsupported conversion operation {op.name!r}")

    def _hrotate_add(self, dims: CkksDims, deps) -> list[int]:
        n = dims.n
        auto = [self.g.add("Auto", "Conversion", n, 2 * n, 0, deps, 0, "HRotate")]
        ks = self.keyswitch(dims, 0, auto, scheme="Conversion")
        return self.ewise("Conversion", n, 1, 2, 0, ks, "Accumulate", cluster=0)

    def _pack(self, dims: CkksDims, m: int, deps) -> list[int]:
        if m <= 1:
            return list(deps)
        even = self._pack(dims, m // 2, deps)
        odd = self._pack(dims, m // 2, deps)
        n = dims.n
        rot = [self.g.add("Rotate", "Conversion", n, 2 * n, 0, odd, 0, "Monomial")]
        mix = self.ewise("Conversion", n, 1, 4, 0, even + rot, "AddSub", cluster=0)
        return self._hrotate_add(dims, mix)


def build_kernel_graph(ops: Sequence[Op | str], params, clusters: int = 1, word_bytes: float = 4.5) -> KernelGraph:
    """Expand `ops` into kernels.  `params` is a CkksDims or TfheDims (or the
    scheme parameter objects themselves).  Ops on the same stream run in
    order; different streams are independent.  Consecutive PBS ops on a
    stream share one accumulator: each waits for the previous blind rotation,
    not for the previous key switch."""
    if not isinstance(params, (CkksDims, TfheDims)):
        params = TfheDims.from_params(params) if hasattr(params, "n_lwe") else CkksDims.from_params(params)
    g = KernelGraph(clusters=clusters)
    b = _Builder(g, word_bytes)
    tails: dict[int, list[int]] = {}
    for op in ops:
        if isinstance(op, str):
            op = Op(op)
        deps = tails.get(op.stream, [])
        if op.name == "PBS":
            if not isinstance(params, TfheDims):
                raise UnsupportedOp("PBS needs TFHE parameters")
            out, tails[op.stream] = b.pbs(params, deps, op.stream % clusters)
            continue
        elif op.name in ("SampleExtract", "RingEmbed", "PackLWEs", "FieldTrace"):
            if not isinstance(params, CkksDims):
                raise UnsupportedOp(f"{op.name} needs CKKS parameters")
            out = b.conversion(params, op, deps)
        else:
            if not isinstance(params, CkksDims):
                raise UnsupportedOp(f"{op.name} needs CKKS parameters")
            out = b.ckks_op(params, op, deps)
        tails[op.stream] = out
    return g

"""NTT mapping strategies and the assignment of kernels to hardware units.

Stage-occupancy model for one N-point NTT (N = 2^lg, 2^8 <= N <= 2^16): the
useful work is lg butterfly stages over N/2 butterflies; utilization is that
divided by the butterfly-stage slots the design keeps occupied.

* F1-like: an 8-stage, 256-lane pipeline wired for 2^16 points, so every
  transform makes both four-step passes through all 8 stages: lg / 16.
* FAB-like: one 2048-lane butterfly stage whose shuffle network only spans
  256-point tiles; each stage beyond the eighth needs an extra permutation
  pass through the stage: lg / (lg + max(0, lg - 8)).
* Hetero: N = 2M runs on the NTTU alone; 4M <= N <= 2M^2 runs phase 1 on the
  NTTU and phase 2 on CUs whose column counts add up to lg - 8; N = 4M^2
  runs both phases on the NTTU.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..errors import UnsupportedSize
from .config import HardwareConfig
from .graph import KernelGraph

STRATEGIES = ("F1Like", "FABLike", "Hetero")
MIN_LOG, MAX_LOG = 8, 16


# ---------------------------------------------------------------------------
# inventory

@dataclass(frozen=True)
class Unit:
    name: str
    cluster: int
    kind: str  # NTTU, TP, CU, SA, EWE, AutoU, Rotator, VPU, NoC, HBM
    stages: int
    columns: int = 0
    capacity: int = 0  # butterflies/MACs/lanes per cycle, used to weight utilization

    @property
    def label(self) -> str:
        return f"CU-{self.columns}" if self.kind == "CU" else self.kind


COMPUTE_KINDS = ("NTTU", "CU", "SA", "EWE")


def build_units(config: HardwareConfig) -> dict[str, Unit]:
    units: dict[str, Unit] = {}

    def add(u: Unit):
        units[u.name] = u

    for c in range(config.n_clusters):
        for i in range(config.nttu_count):
            add(Unit(f"c{c}.nttu{i}", c, "NTTU", config.nttu_stages,
                     capacity=config.nttu_stages * config.nttu_rows))
        for i in range(config.tp_count):
            add(Unit(f"c{c}.tp{i}", c, "TP", config.nttu_stages))
        for i, cols in enumerate(config.active_cus):
            add(Unit(f"c{c}.cu{i}", c, "CU", cols, cols, cols * config.cu_rows))
        if config.sa_depth:
            add(Unit(f"c{c}.sa", c, "SA", config.sa_depth, config.sa_depth, config.sa_depth * config.cu_rows))
        for kind, count, cap in (("EWE", config.ewe_count, config.ewe_lanes),
                                 ("AutoU", config.autou_count, config.lane_width),
                                 ("Rotator", config.rotator_count, config.lane_width),
                                 ("VPU", config.vpu_count, config.lane_width)):
            for i in range(count):
                add(Unit(f"c{c}.{kind.lower()}{i}", c, kind, 1, capacity=cap))
        add(Unit(f"c{c}.noc", c, "NoC", 1))
    add(Unit("hbm", -1, "HBM", 1))
    return units


# ---------------------------------------------------------------------------
# NTT strategies

@dataclass(frozen=True)
class NttMapping:
    strategy: str
    n: int
    phase1: str  # unit kind running phase 1
    phase2: str  # "" when the transform is a single pass
    cu_columns: tuple[int, ...] = ()
    useful_stages: int = 0
    occupied_stages: int = 0

    @property
    def utilization(self) -> float:
        return self.useful_stages / self.occupied_stages if self.occupied_stages else 0.0


def _check_size(n: int) -> int:
    lg = n.bit_length() - 1
    if n < 1 or n & (n - 1) or not MIN_LOG <= lg <= MAX_LOG:
        raise UnsupportedSize(f"NTT length {n} outside [2^{MIN_LOG}, 2^{MAX_LOG}]")
    return lg


def pick_cus(columns: tuple[int, ...], need: int, taken: frozenset = frozenset()) -> tuple[int, ...] | None:
    """Indices of free CUs whose columns sum to `need`: fewest CUs, then
    smallest total, then lowest indices.  None if no subset reaches `need`."""
    free = [i for i in range(len(columns)) if i not in taken]
    best = None
    for r in range(1, len(free) + 1):
        for combo in itertools.combinations(free, r):
            total = sum(columns[i] for i in combo)
            if total < need:
                continue
            key = (total - need, r, combo)
            if best is None or key < best[0]:
                best = (key, combo)
        if best is not None and best[0][0] == 0:
            break
    return None if best is None else best[1]


def map_ntt(n: int, config: HardwareConfig, strategy: str = "Hetero") -> tuple[NttMapping, float]:
    lg = _check_size(n)
    if strategy == "F1Like":
        m = NttMapping(strategy, n, "Pipeline8", "Pipeline8", useful_stages=lg, occupied_stages=16)
    elif strategy == "FABLike":
        m = NttMapping(strategy, n, "Stage2048", "", useful_stages=lg, occupied_stages=lg + max(0, lg - 8))
    elif strategy == "Hetero":
        s = config.nttu_stages
        if lg <= s:
            m = NttMapping(strategy, n, "NTTU", "", useful_stages=lg, occupied_stages=s)
        elif lg >= 2 * s or not config.active_cus:
            m = NttMapping(strategy, n, "NTTU", "NTTU", useful_stages=lg, occupied_stages=2 * s)
        else:
            pick = pick_cus(config.active_cus, lg - s)
            if pick is None:
                m = NttMapping(strategy, n, "NTTU", "NTTU", useful_stages=lg, occupied_stages=2 * s)
            else:
                cols = tuple(config.active_cus[i] for i in pick)
                m = NttMapping(strategy, n, "NTTU", "CU", cols, lg, s + sum(cols))
    else:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    return m, m.utilization


def ntt_utilization_sweep(config: HardwareConfig) -> list[tuple[str, int, float]]:
    return [(s, 1 << lg, map_ntt(1 << lg, config, s)[1])
            for s in STRATEGIES for lg in range(MIN_LOG, MAX_LOG + 1)]


# ---------------------------------------------------------------------------
# component allocation

@dataclass(frozen=True)
class ExecGroup:
    """Units that work on one kernel together."""
    name: str
    units: tuple[str, ...]
    throughput: float  # work items per cycle
    fill: int  # extra cycles before the result is usable
    passes: int = 1  # multiplier on work (two four-step passes through an NTTU)
    stages: int = 0  # butterfly stages an NTT crosses on this group, 0 if not an NTT group

    def stage_efficiency(self, n: int) -> float:
        """Useful fraction of the butterfly stages an n-point NTT occupies."""
        if not self.stages:
            return 1.0
        return min(1.0, (n.bit_length() - 1) / self.stages)


@dataclass
class MappingPlan:
    groups: dict[str, ExecGroup] = field(default_factory=dict)
    node_groups: list[tuple[str, ...]] = field(default_factory=list)
    roles: dict[str, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def describe(self) -> list[str]:
        return list(self.notes)


def _fill(config: HardwareConfig, units: dict[str, Unit], names) -> int:
    return sum(units[u].stages for u in names) + config.fill_extra


def allocate_components(graph: KernelGraph, config: HardwareConfig) -> MappingPlan:
    """NTT demand first (NTTUs, then CUs as phase-2 stages), then the
    leftover CUs take MAC kernels.  Units missing for a role are replaced by
    time-sharing another unit; allocation never fails."""
    units = build_units(config)
    plan = MappingPlan()
    if not graph.nodes:
        return plan
    lanes = config.lane_width
    s = config.nttu_stages
    ntt_sizes = [nd.n for nd in graph.nodes if nd.kind in ("NTT", "iNTT")]
    n_max = max(ntt_sizes) if ntt_sizes else 0
    lg = n_max.bit_length() - 1 if n_max else 0
    schemes = {nd.scheme for nd in graph.nodes}
    tfhe = "TFHE" in schemes

    per_cluster: dict[int, dict[str, list[str]]] = {}
    for c in range(config.n_clusters):
        ntt_groups, taken = [], set()
        cu_idx = list(range(len(config.active_cus)))
        for i in range(config.nttu_count):
            nttu = f"c{c}.nttu{i}"
            tp = f"c{c}.tp{i}" if i < config.tp_count else None
            if lg <= s:
                g = ExecGroup(f"c{c}.ntt{i}", (nttu,), lanes, _fill(config, units, (nttu,)), stages=s)
                plan.roles[nttu] = "NTT"
            else:
                pick = pick_cus(config.active_cus, lg - s, frozenset(taken)) if lg < 2 * s else None
                if pick is not None:
                    cus = tuple(f"c{c}.cu{j}" for j in pick)
                    taken.update(pick)
                    names = (nttu,) + cus
                    g = ExecGroup(f"c{c}.ntt{i}", names, min(lanes, config.cu_ntt_factor * config.cu_rows),
                                  _fill(config, units, names), stages=s + sum(units[u].stages for u in cus))
                    plan.roles[nttu] = "NTT phase 1"
                    for u in cus:
                        plan.roles[u] = "NTT phase 2"
                else:
                    names = (nttu,) + ((tp,) if tp else ())
                    g = ExecGroup(f"c{c}.ntt{i}", names, lanes, _fill(config, units, (nttu,)) + s, passes=2,
                                  stages=2 * s)
                    plan.roles[nttu] = "NTT phase 1+2"
                    if tp:
                        plan.roles[tp] = "Transpose"
            plan.groups[g.name] = g
            ntt_groups.append(g.name)
        free = [j for j in cu_idx if j not in taken]
        mac_cols = lambda idx: sum(config.active_cus[j] for j in idx)
        mac_rate = lambda idx: mac_cols(idx) * config.cu_rows * config.cu_mac_factor

        groups: dict[str, list[str]] = {"ntt": ntt_groups}
        ewe = ExecGroup(f"c{c}.ewe", (f"c{c}.ewe0",), config.ewe_lanes, _fill(config, units, (f"c{c}.ewe0",)))
        plan.groups[ewe.name] = ewe
        groups["ewe"] = [ewe.name]

        def cu_group(name, idx, role):
            names = tuple(f"c{c}.cu{j}" for j in idx)
            g = ExecGroup(f"c{c}.{name}", names, mac_rate(idx), max(config.active_cus[j] for j in idx) + config.fill_extra)
            plan.groups[g.name] = g
            for u in names:
                plan.roles[u] = role
            return g.name

        sa = f"c{c}.sa" if config.sa_depth else None
        if sa:
            g = ExecGroup(f"c{c}.sa", (sa,), config.sa_depth * config.cu_rows, _fill(config, units, (sa,)))
            plan.groups[g.name] = g
            plan.roles[sa] = "MAC"

        def fallback_mac():
            if sa:
                return [f"c{c}.sa"]
            if config.active_cus:  # share the NTT pipelines' CUs
                return [cu_group("mac_shared", cu_idx, "NTT/MAC (shared)")]
            return [ewe.name]

        if tfhe:
            groups["extprod"] = [cu_group("mac", free, "MAC ExtProd")] if free else fallback_mac()
        else:
            two = [j for j in free if config.active_cus[j] == 2][:2]
            if config.ip_on_ewe:
                groups["ip"], rest = [ewe.name], free
            elif len(two) == 2:
                groups["ip"] = [cu_group("ip", two, "MAC IP")]
                rest = [j for j in free if j not in two]
            else:
                groups["ip"], rest = fallback_mac(), free
            groups["bconv"] = [cu_group("bconv", rest, "MAC BConv")] if rest else fallback_mac()
        for key in ("vpu", "autou", "rotator"):
            name = f"c{c}.{key}0"
            if name in units:
                rate = config.lane_width
                g = ExecGroup(name, (name,), rate, _fill(config, units, (name,)))
                plan.groups[g.name] = g
                groups[key] = [g.name]
            else:
                groups[key] = [ewe.name]
        groups["lweks"] = groups.get("extprod") or groups["bconv"]
        tp_units = tuple(f"c{c}.tp{i}" for i in range(config.tp_count))
        groups["tp"] = []
        for u in tp_units:
            plan.groups[u] = ExecGroup(u, (u,), lanes, _fill(config, units, (u,)))
            groups["tp"].append(u)
        if not groups["tp"]:
            groups["tp"] = groups["ntt"]
        noc = ExecGroup(f"c{c}.noc", (f"c{c}.noc",), config.noc_bytes_per_cycle, config.fill_extra)
        plan.groups[noc.name] = noc
        groups["noc"] = [noc.name]
        per_cluster[c] = groups

    hbm = ExecGroup("hbm", ("hbm",), config.hbm_bytes_per_cycle, config.fill_extra)
    plan.groups["hbm"] = hbm

    for nd in graph.nodes:
        g = per_cluster[nd.cluster % config.n_clusters]
        k = nd.kind
        if k in ("NTT", "iNTT"):
            cand = g["ntt"]
        elif k == "MAC":
            cand = {"ExtProd": g.get("extprod"), "LweKS": g["lweks"], "IP": g.get("ip"),
                    "BConv": g.get("bconv")}.get(nd.detail) or g.get("extprod") or g.get("bconv")
        elif k == "Elementwise":
            cand = g["ewe"]
        elif k == "Auto":
            cand = g["autou"]
        elif k == "Rotate":
            cand = g["rotator"]
        elif k == "Decompose":
            cand = g["vpu"]
        elif k == "Transpose":
            cand = g["tp"]
        elif k == "NoCTransfer":
            cand = g["noc"]
        else:
            cand = ["hbm"]
        plan.node_groups.append(tuple(cand))

    g0 = per_cluster[0]
    plan.notes.append(f"NTT length {n_max}: " + "; ".join(
        "+".join(units[u].label for u in plan.groups[x].units) + (" (two passes)" if plan.groups[x].passes == 2 else "")
        for x in g0["ntt"]))
    for key in ("bconv", "ip", "extprod"):
        if key in g0:
            plan.notes.append(f"{key}: " + "+".join(units[u].label for x in g0[key] for u in plan.groups[x].units))
    return plan

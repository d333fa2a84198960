"""Named workloads that the reports and the CLI are built from."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .config import HardwareConfig, preset_config
from .graph import CkksDims, Op, TfheDims, build_kernel_graph
from .mapping import allocate_components, ntt_utilization_sweep
from .report import Breakdown, op_breakdown, utilization_report
from .simulate import ScheduleTrace, simulate

# TFHE sets as (N, n, k, l_b, l_k); l_k is the key-switch level count used by
# the functional implementation as well.
TFHE_SETS = {
    "Set-I": TfheDims(1024, 500, 1, 2, 3),
    "Set-II": TfheDims(1024, 630, 1, 3, 3),
    "Set-III": TfheDims(2048, 592, 1, 3, 3),
}
KEYSWITCH_DIMS = CkksDims(1 << 16, 23, 3)


def tfhe_dims(name: str) -> TfheDims:
    try:
        return TFHE_SETS[name]
    except KeyError:
        raise KeyError(f"unknown TFHE set {name!r}; known: {sorted(TFHE_SETS)}") from None


# breakdown -------------------------------------------------------------------

@dataclass(frozen=True)
class BreakdownRow:
    workload: str
    ntt_fraction: float
    mac_fraction: float
    other_fraction: float

    @classmethod
    def of(cls, name: str, b: Breakdown) -> "BreakdownRow":
        return cls(name, b.ntt_fraction, b.mac_fraction, b.other_fraction)


def keyswitch_breakdown(levels: int = 23, dnum: int = 3, n: int = 1 << 16) -> Breakdown:
    dims = CkksDims(n, levels, dnum)
    return op_breakdown(build_kernel_graph([Op("KeySwitch")], dims))


def pbs_breakdown(name: str) -> Breakdown:
    return op_breakdown(build_kernel_graph([Op("PBS")], tfhe_dims(name)))


def breakdown_rows(levels: int = 23, dnum: int = 3) -> list[BreakdownRow]:
    """One KeySwitch row, then a row per PBS set plus their average (the mean
    of the per-set fractions)."""
    rows = [BreakdownRow.of(f"CKKS KeySwitch L={levels} dnum={dnum}", keyswitch_breakdown(levels, dnum))]
    sets = [BreakdownRow.of(f"TFHE PBS {s}", pbs_breakdown(s)) for s in TFHE_SETS]
    rows += sets
    k = len(sets)
    ntt = sum(r.ntt_fraction for r in sets) / k
    mac = sum(r.mac_fraction for r in sets) / k
    other = sum(r.other_fraction for r in sets) / k
    rows.append(BreakdownRow("TFHE PBS average", ntt, mac, other))
    return rows


# NTT utilization ---------------------------------------------------------------

def ntt_sweep_rows(config: HardwareConfig | None = None) -> list[tuple[str, int, float]]:
    return ntt_utilization_sweep(config or HardwareConfig())


def ntt_mean_improvement(config: HardwareConfig | None = None) -> float:
    """Mean over N of heterogeneous utilization / max(F1-like, FAB-like)."""
    rows = ntt_sweep_rows(config)
    by = {(s, n): u for s, n, u in rows}
    sizes = sorted({n for _, n, _ in rows})
    ratios = [by["Hetero", n] / max(by["F1Like", n], by["FABLike", n]) for n in sizes]
    return sum(ratios) / len(ratios)


# simulation ------------------------------------------------------------------------

@dataclass(frozen=True)
class SimResult:
    workload: str
    config: str
    clusters: int
    operations: int
    cycles: int
    ops_per_second: float
    utilization: float


@lru_cache(maxsize=2)
def _graph(ops: tuple, dims, clusters: int, word_bytes: float):
    # the with/without-CU comparisons expand the same workload twice
    return build_kernel_graph(ops, dims, clusters=clusters, word_bytes=word_bytes)


def run_ops(name: str, ops, dims, config: HardwareConfig) -> tuple[SimResult, ScheduleTrace]:
    graph = _graph(tuple(ops), dims, config.n_clusters, config.word_bytes)
    trace = simulate(graph, allocate_components(graph, config), config)
    rep = utilization_report(trace)
    count = len(ops)
    ops_s = count * config.freq_ghz * 1e9 / trace.total_cycles if trace.total_cycles else 0.0
    return SimResult(name, config.name, config.n_clusters, count, trace.total_cycles, ops_s, rep.aggregate), trace


def _run(name: str, ops, dims, config: HardwareConfig) -> SimResult:
    return run_ops(name, ops, dims, config)[0]


def pbs_ops(config: HardwareConfig, streams: int = 8, rounds: int = 2) -> list[Op]:
    return [Op("PBS", stream=s) for _ in range(rounds) for s in range(streams * config.n_clusters)]


def ckks_ops(levels: int = 23, streams: int = 4, depth: int = 2) -> list[Op]:
    ops = []
    for s in range(streams):
        lvl = levels
        for _ in range(depth):
            ops += [Op("HMult", lvl, s), Op("Rescale", lvl, s)]
            lvl -= 1
            ops += [Op("HRotate", lvl, s), Op("HAdd", lvl, s)]
    return ops


def pbs_throughput(config: HardwareConfig, set_name: str = "Set-I", streams: int = 8, rounds: int = 2) -> SimResult:
    """`streams` accumulator slots per cluster, each running `rounds`
    bootstraps back to back."""
    return _run(f"PBS {set_name}", pbs_ops(config, streams, rounds), tfhe_dims(set_name), config)


def ckks_workload(config: HardwareConfig, levels: int = 23, dnum: int = 3, n: int = 1 << 16,
                  streams: int = 4, depth: int = 2) -> SimResult:
    """Independent streams of HMult + Rescale + HRotate + HAdd chains."""
    return _run("CKKS mult/rotate", ckks_ops(levels, streams, depth), CkksDims(n, levels, dnum), config)


def cu_comparison(set_name: str, streams: int = 8, rounds: int = 2) -> tuple[SimResult, SimResult]:
    """(with CUs, without CUs) on one cluster."""
    return (pbs_throughput(preset_config("tfhe-wcu"), set_name, streams, rounds),
            pbs_throughput(preset_config("tfhe-wocu"), set_name, streams, rounds))


def cluster_scaling(set_name: str = "Set-I", streams: int = 1, rounds: int = 1,
                    config: HardwareConfig | None = None) -> tuple[SimResult, SimResult]:
    """(full config, same config cut down to one cluster), same per-cluster load."""
    full = config or preset_config("default")
    return (pbs_throughput(full, set_name, streams, rounds),
            pbs_throughput(full.replace(n_clusters=1), set_name, streams, rounds))

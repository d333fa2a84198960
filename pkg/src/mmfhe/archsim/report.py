"""Breakdown and utilization reports, plus CSV/JSON export of traces."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field

from .graph import KernelGraph
from .mapping import COMPUTE_KINDS
from .simulate import ScheduleTrace

NTT_KINDS = ("NTT", "iNTT")


@dataclass(frozen=True)
class Breakdown:
    ntt_work: int
    mac_work: int
    other_work: int

    @property
    def total(self) -> int:
        return self.ntt_work + self.mac_work + self.other_work

    def _frac(self, x: int) -> float:
        return x / self.total if self.total else 0.0

    @property
    def ntt_fraction(self) -> float:
        return self._frac(self.ntt_work)

    @property
    def mac_fraction(self) -> float:
        return self._frac(self.mac_work)

    @property
    def other_fraction(self) -> float:
        # the remainder, so the three sum to 1; exactly 0 when there is no other work
        if not self.other_work:
            return 0.0
        return 1.0 - self.ntt_fraction - self.mac_fraction


def op_breakdown(graph: KernelGraph) -> Breakdown:
    """Split the graph's modular multiplies into NTT butterflies, MACs and
    everything else (element-wise products)."""
    ntt = mac = other = 0
    for nd in graph.nodes:
        if nd.kind in NTT_KINDS:
            ntt += nd.mults
        elif nd.kind == "MAC":
            mac += nd.mults
        else:
            other += nd.mults
    return Breakdown(ntt, mac, other)


@dataclass
class UtilizationReport:
    """``aggregate`` is the mean busy fraction over the datapath components
    the workload exercised (units with arithmetic lanes and nonzero busy
    time; transpose buffers and transfer channels are not components).
    ``weighted`` weights NTTU/CU/SA/EWE busy fractions by datapath width over
    the whole inventory, and ``stage_weighted`` additionally scales NTT busy
    time by the stage efficiency of the group it ran on."""
    total_cycles: int
    per_unit: dict[str, float] = field(default_factory=dict)
    per_kind: dict[str, float] = field(default_factory=dict)
    aggregate: float = 0.0
    weighted: float = 0.0
    stage_weighted: float = 0.0
    ntt_busy: int = 0
    mac_busy: int = 0


def utilization_report(trace: ScheduleTrace) -> UtilizationReport:
    total = trace.total_cycles
    if not total:
        return UtilizationReport(0, {u: 0.0 for u in sorted(trace.units)},
                                 {k: 0.0 for k in sorted({u.label for u in trace.units.values()})})
    useful: dict[str, float] = defaultdict(float)
    ntt_busy = mac_busy = 0
    for iv in trace.intervals:
        c = iv.end - iv.start
        useful[iv.unit] += c * iv.efficiency
        if iv.kind in NTT_KINDS:
            ntt_busy += c
        elif iv.kind == "MAC":
            mac_busy += c
    per_unit = {u: trace.unit_busy.get(u, 0) / total for u in sorted(trace.units)}
    kinds: dict[str, list[float]] = defaultdict(list)
    for u, unit in trace.units.items():
        kinds[unit.label].append(per_unit[u])
    per_kind = {k: sum(v) / len(v) for k, v in sorted(kinds.items())}
    used = [per_unit[u] for u in sorted(trace.units) if trace.units[u].capacity and per_unit[u] > 0]
    occ = eff = den = 0.0
    for u, unit in trace.units.items():
        if unit.kind in COMPUTE_KINDS and unit.capacity:
            occ += unit.capacity * per_unit[u]
            eff += unit.capacity * useful[u] / total
            den += unit.capacity
    return UtilizationReport(total, per_unit, per_kind, sum(used) / len(used) if used else 0.0,
                             occ / den if den else 0.0, eff / den if den else 0.0, ntt_busy, mac_busy)


TRACE_COLUMNS = ("node", "kind", "detail", "scheme", "unit", "start", "end", "cycles")


def trace_csv(trace: ScheduleTrace) -> str:
    """One row per kernel occupancy of a unit, ordered by (start, unit, node)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for iv in sorted(trace.intervals, key=lambda i: (i.start, i.unit, i.node)):
        w.writerow((iv.node, iv.kind, iv.detail, iv.scheme, iv.unit, iv.start, iv.end, iv.cycles))
    return buf.getvalue()


def trace_summary(trace: ScheduleTrace) -> dict:
    rep = utilization_report(trace)
    return {
        "total_cycles": rep.total_cycles,
        "aggregate_utilization": rep.aggregate,
        "weighted_utilization": rep.weighted,
        "stage_weighted_utilization": rep.stage_weighted,
        "ntt_busy_cycles": rep.ntt_busy,
        "mac_busy_cycles": rep.mac_busy,
        "per_kind": dict(rep.per_kind),
        "per_unit": {u: {"busy": trace.unit_busy[u], "utilization": rep.per_unit[u]} for u in sorted(trace.units)},
    }

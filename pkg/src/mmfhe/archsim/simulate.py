"""Deterministic list scheduler over a kernel graph.

Nodes become ready when all their dependencies have produced results.  Ready
nodes are taken in (ready cycle, node id) order, so every unit serves its
queue first come first served, and each goes to the candidate unit group
that can start it earliest (first group on ties).  A node keeps every unit
of its group busy for ceil(work * passes / throughput) cycles; its result is
usable ``fill`` cycles after that, so a pipelined unit accepts the next
kernel while the previous one drains.

NTT intervals also record the stage efficiency of the group they ran on: a
transform that crosses more butterfly stages than it needs (two passes
through an 8-stage NTTU for a 1024-point NTT, say) is busy but partly idle
inside.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .config import HardwareConfig
from .graph import KernelGraph
from .mapping import ExecGroup, MappingPlan, Unit, allocate_components, build_units

TRANSFER_KINDS = ("NoCTransfer", "HbmTransfer")


class Interval(NamedTuple):
    node: int
    kind: str
    detail: str
    scheme: str
    unit: str
    start: int
    end: int
    efficiency: float = 1.0

    @property
    def cycles(self) -> int:
        return self.end - self.start


@dataclass
class ScheduleTrace:
    total_cycles: int
    intervals: list[Interval] = field(default_factory=list)
    unit_busy: dict[str, int] = field(default_factory=dict)
    units: dict[str, Unit] = field(default_factory=dict)
    node_start: list[int] = field(default_factory=list)
    node_finish: list[int] = field(default_factory=list)
    node_group: list[str] = field(default_factory=list)


def kernel_cycles(work: int, group: ExecGroup) -> int:
    if work <= 0:
        return 1
    return max(1, math.ceil(work * group.passes / group.throughput))


def simulate(graph: KernelGraph, plan: MappingPlan | None = None, config: HardwareConfig | None = None) -> ScheduleTrace:
    config = config or HardwareConfig()
    plan = plan if plan is not None else allocate_components(graph, config)
    units = build_units(config)
    nodes = graph.nodes
    count = len(nodes)
    if count == 0:
        return ScheduleTrace(0, units=units, unit_busy={u: 0 for u in units})
    if len(plan.node_groups) != count:
        raise ValueError("mapping plan does not cover every node")

    waiting = [len(nd.deps) for nd in nodes]
    children: list[list[int]] = [[] for _ in range(count)]
    for nd in nodes:
        for d in nd.deps:
            children[d].append(nd.id)
    ready_at = [0] * count
    free = {u: 0 for u in units}
    busy = {u: 0 for u in units}
    start = [0] * count
    finish = [0] * count
    chosen = [""] * count
    intervals: list[Interval] = []
    heap = [(0, nd.id) for nd in nodes if not nd.deps]
    heapq.heapify(heap)
    groups = plan.groups
    cost: dict[tuple, tuple[int, float]] = {}
    done = 0
    while heap:
        t, nid = heapq.heappop(heap)
        nd = nodes[nid]
        best = None
        for gname in plan.node_groups[nid]:
            g = groups[gname]
            s = t
            for u in g.units:
                if free[u] > s:
                    s = free[u]
            if best is None or s < best[0]:
                best = (s, g)
        s, g = best
        key = (g.name, nd.kind, nd.n, nd.work, nd.nbytes)
        if key not in cost:
            cost[key] = (kernel_cycles(nd.nbytes if nd.kind in TRANSFER_KINDS else nd.work, g),
                         g.stage_efficiency(nd.n) if nd.kind in ("NTT", "iNTT") else 1.0)
        c, eff = cost[key]
        end = s + c
        for u in g.units:
            free[u] = end
            busy[u] += c
            intervals.append(Interval(nid, nd.kind, nd.detail, nd.scheme, u, s, end, eff))
        start[nid], finish[nid], chosen[nid] = s, end + g.fill, g.name
        done += 1
        for ch in children[nid]:
            if finish[nid] > ready_at[ch]:
                ready_at[ch] = finish[nid]
            waiting[ch] -= 1
            if waiting[ch] == 0:
                heapq.heappush(heap, (ready_at[ch], ch))
    if done != count:
        raise ValueError("kernel graph has a cycle")
    return ScheduleTrace(max(finish), intervals, busy, units, start, finish, chosen)

"""Cycle-level model of a multi-modal FHE accelerator."""
from .config import ENV_VAR, HardwareConfig, load_config, parse_config, preset_config
from .graph import CkksDims, KernelGraph, KernelNode, Op, TfheDims, build_kernel_graph
from .mapping import (STRATEGIES, ExecGroup, MappingPlan, NttMapping, Unit, allocate_components, build_units,
                      map_ntt, ntt_utilization_sweep)
from .report import Breakdown, UtilizationReport, op_breakdown, trace_csv, trace_summary, utilization_report
from .simulate import Interval, ScheduleTrace, simulate

__all__ = [
    "ENV_VAR", "HardwareConfig", "load_config", "parse_config", "preset_config",
    "CkksDims", "KernelGraph", "KernelNode", "Op", "TfheDims", "build_kernel_graph",
    "STRATEGIES", "ExecGroup", "MappingPlan", "NttMapping", "Unit", "allocate_components", "build_units",
    "map_ntt", "ntt_utilization_sweep",
    "Breakdown", "UtilizationReport", "op_breakdown", "trace_csv", "trace_summary", "utilization_report",
    "Interval", "ScheduleTrace", "simulate",
]

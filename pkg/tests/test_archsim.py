import json
from collections import defaultdict

import pytest

from mmfhe.archsim import (
    ENV_VAR, CkksDims, HardwareConfig, Interval, KernelGraph, Op, ScheduleTrace, TfheDims, Unit,
    allocate_components, build_kernel_graph, load_config, map_ntt, ntt_utilization_sweep, op_breakdown,
    parse_config, preset_config, simulate, trace_csv, trace_summary, utilization_report,
)
from mmfhe.archsim.report import TRACE_COLUMNS
from mmfhe.archsim.scenarios import (
    TFHE_SETS, ckks_workload, ntt_mean_improvement, pbs_ops, run_ops,
)
from mmfhe.errors import FormatError, UnsupportedOp, UnsupportedSize

SMALL_TFHE = TfheDims(256, 12, 1, 2, 3)
SIZES = [1 << lg for lg in range(8, 17)]


def sim(ops, dims, config):
    g = build_kernel_graph(ops, dims, clusters=config.n_clusters, word_bytes=config.word_bytes)
    plan = allocate_components(g, config)
    return g, plan, simulate(g, plan, config)


# configuration -------------------------------------------------------------------

def test_default_inventory():
    c = HardwareConfig()
    assert c.n_clusters == 4 and c.nttu_rows == 128 and c.nttu_stages == 8
    assert c.cu_rows == 128 and c.word_bits == 36
    assert c.hbm_stacks == 2 and c.hbm_tbps == 1.0
    assert sorted(c.cu_columns) == [1, 2, 2, 2, 2, 3]
    assert c.ewe_lanes == 512 and c.lane_width == 256
    assert c.fill_extra == 4
    assert preset_config("default") == c


def test_config_round_trip():
    c = HardwareConfig(n_clusters=2, cu_columns=(3, 3), ip_on_ewe=True, hbm_tbps=0.5)
    assert parse_config(c.dumps()) == c
    assert c.config_hash() == parse_config(c.dumps()).config_hash()


@pytest.mark.parametrize("text", [
    "n_cluster = 4",
    "n_clusters = four",
    "cu_enabled = maybe",
    "just a line",
    "n_clusters = 0",
    "nttu_rows = 100",
    "cu_columns = 1, 0",
])
def test_config_errors(text):
    with pytest.raises(FormatError):
        parse_config(text)


def test_config_comments_and_blanks():
    c = parse_config("# header\n\nn_clusters = 2  # two\ncu_enabled = no\n")
    assert c.n_clusters == 2 and not c.cu_enabled and c.active_cus == ()


def test_load_config_env(tmp_path, monkeypatch):
    f = tmp_path / "hw.cfg"
    f.write_text("n_clusters = 3\n")
    monkeypatch.setenv(ENV_VAR, str(f))
    assert load_config().n_clusters == 3
    monkeypatch.setenv(ENV_VAR, "tfhe-wocu")
    assert load_config().sa_depth == 12
    monkeypatch.delenv(ENV_VAR)
    assert load_config() == HardwareConfig()
    with pytest.raises(FormatError):
        load_config(tmp_path / "missing.cfg")
    with pytest.raises(FormatError):
        preset_config("nope")


# kernel graph ------------------------------------------------------------------------

def test_hadd_is_one_elementwise():
    g = build_kernel_graph([Op("HAdd")], CkksDims(1 << 16, 23, 3))
    assert g.counts() == {"Elementwise": 1}


def keyswitch_tally(n_limbs, dnum_alpha, k):
    """Hand count from the hybrid key-switching loop on one cluster."""
    digits = [min(dnum_alpha, n_limbs - s) for s in range(0, n_limbs, dnum_alpha)]
    ext = n_limbs + k
    return {
        "iNTT": n_limbs + 2 * ext,  # ModUp input, ModDown of both accumulators
        "NTT": sum(ext - a for a in digits) + 2 * n_limbs,  # extended digits, ModDown output
        "MAC": len(digits) + 1 + 1,  # BConv per digit, IP, ModDown BConv
        "Elementwise": 1,
    }


@pytest.mark.parametrize("levels,dnum", [(23, 3), (5, 2), (35, 3)])
def test_keyswitch_counts(levels, dnum):
    dims = CkksDims(1 << 16, levels, dnum)
    g = build_kernel_graph([Op("KeySwitch")], dims)
    assert dict(g.counts()) == keyswitch_tally(levels + 1, dims.alpha, dims.k)
    assert g.detail_counts()[("MAC", "IP")] == 1
    assert g.detail_counts()[("MAC", "BConv")] == len(dims.digits(levels)) + 1


def test_keyswitch_l23_numbers():
    g = build_kernel_graph([Op("KeySwitch")], CkksDims(1 << 16, 23, 3))
    assert g.counts()["NTT"] == 3 * 24 + 48
    assert g.counts()["iNTT"] == 24 + 64


def test_pbs_set1_counts():
    d = TFHE_SETS["Set-I"]
    g = build_kernel_graph([Op("PBS")], d)
    c = g.counts()
    assert c["NTT"] == 500 * 4 and c["iNTT"] == 500 * 2
    assert g.detail_counts()[("MAC", "ExtProd")] == 500


def test_graph_errors():
    with pytest.raises(UnsupportedOp):
        build_kernel_graph([Op("Bootstrap")], CkksDims(1 << 12, 3, 2))
    with pytest.raises(UnsupportedOp):
        build_kernel_graph([Op("PBS")], CkksDims(1 << 12, 3, 2))
    with pytest.raises(UnsupportedOp):
        build_kernel_graph([Op("HAdd")], SMALL_TFHE)
    with pytest.raises(UnsupportedOp):
        build_kernel_graph([Op("Rescale", level=0)], CkksDims(1 << 12, 3, 2))
    with pytest.raises(UnsupportedOp):
        KernelGraph().add("FFT", "CKKS", 8, 8, 8)


def test_graph_is_acyclic_by_construction():
    g = build_kernel_graph([Op("HMult"), Op("Rescale"), Op("HRotate", 22)], CkksDims(1 << 14, 23, 3), clusters=4)
    assert all(d < nd.id for nd in g.nodes for d in nd.deps)


def test_conversion_graph():
    dims = CkksDims(1 << 14, 8, 3)
    g = build_kernel_graph([Op("SampleExtract", n_slot=8), Op("RingEmbed", n_slot=8), Op("PackLWEs", n_slot=8),
                            Op("FieldTrace", n_slot=8)], dims)
    # 7 merges in the packing tree and log2(N/8) = 11 trace steps, one key switch each
    assert g.detail_counts()[("MAC", "IP")] == 7 + 11
    assert {nd.scheme for nd in g.nodes} == {"Conversion"}


# breakdown ----------------------------------------------------------------------------

def test_single_ntt_breakdown():
    g = KernelGraph()
    g.add("NTT", "CKKS", 256, 256, 128 * 8)
    b = op_breakdown(g)
    assert (b.ntt_fraction, b.mac_fraction, b.other_fraction) == (1.0, 0.0, 0.0)


def test_empty_breakdown():
    b = op_breakdown(KernelGraph())
    assert (b.ntt_fraction, b.mac_fraction, b.other_fraction) == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("ops,dims", [
    ([Op("KeySwitch")], CkksDims(1 << 16, 23, 3)),
    ([Op("HMult"), Op("Rescale")], CkksDims(1 << 14, 8, 3)),
    ([Op("PBS")], TFHE_SETS["Set-II"]),
])
def test_breakdown_sums_to_one(ops, dims):
    b = op_breakdown(build_kernel_graph(ops, dims))
    assert b.ntt_fraction + b.mac_fraction + b.other_fraction == 1.0
    assert 0 < b.ntt_fraction < 1


def test_ntt_work_convention():
    g = build_kernel_graph([Op("PBS")], SMALL_TFHE)
    for nd in g.nodes:
        if nd.kind in ("NTT", "iNTT"):
            assert nd.mults == (nd.n // 2) * (nd.n.bit_length() - 1)


# NTT mapping ------------------------------------------------------------------------

def test_map_ntt_peaks_and_monotonicity():
    c = HardwareConfig()
    f1 = [map_ntt(n, c, "F1Like")[1] for n in SIZES]
    fab = [map_ntt(n, c, "FABLike")[1] for n in SIZES]
    assert f1[-1] == 1.0 and max(f1) == f1[-1]
    assert all(a <= b for a, b in zip(f1, f1[1:]))
    assert fab[0] == 1.0 and max(fab) == fab[0]
    assert all(a >= b for a, b in zip(fab, fab[1:]))


def test_hetero_dominates():
    c = HardwareConfig()
    for n in SIZES:
        tri = map_ntt(n, c, "Hetero")[1]
        assert tri >= max(map_ntt(n, c, "F1Like")[1], map_ntt(n, c, "FABLike")[1])
        assert 0 < tri <= 1
    assert ntt_mean_improvement(c) >= 1.1


def test_hetero_phase_choice():
    c = HardwareConfig()
    assert map_ntt(256, c)[0].phase2 == ""  # N = 2M: NTTU alone
    m = map_ntt(1 << 12, c)[0]
    assert (m.phase1, m.phase2) == ("NTTU", "CU") and sum(m.cu_columns) == 4
    assert map_ntt(1 << 16, c)[0].phase2 == "NTTU"  # N = 4M^2: both phases on the NTTU
    m = map_ntt(1 << 12, c.replace(cu_enabled=False))[0]
    assert m.phase2 == "NTTU"


@pytest.mark.parametrize("n", [128, 1 << 17, 300, 0])
def test_map_ntt_size_errors(n):
    with pytest.raises(UnsupportedSize):
        map_ntt(n, HardwareConfig())


def test_map_ntt_unknown_strategy():
    with pytest.raises(ValueError):
        map_ntt(256, HardwareConfig(), "GPU")


def test_sweep_rows():
    rows = ntt_utilization_sweep(HardwareConfig())
    assert len(rows) == 3 * len(SIZES)
    assert all(0 <= u <= 1 for _, _, u in rows)


# allocation ------------------------------------------------------------------------

def test_empty_plan():
    plan = allocate_components(KernelGraph(), HardwareConfig())
    assert not plan.groups and not plan.node_groups and not plan.roles
    assert simulate(KernelGraph(), plan).total_cycles == 0


def test_ckks_ip_on_cus_not_ewe():
    c = HardwareConfig()
    g = build_kernel_graph([Op("KeySwitch")], CkksDims(1 << 16, 23, 3), clusters=4)
    plan = allocate_components(g, c)
    for nd, cand in zip(g.nodes, plan.node_groups):
        if nd.detail == "IP" and nd.kind == "MAC":
            for name in cand:
                units = plan.groups[name].units
                assert all(".cu" in u for u in units) and len(units) == 2
                assert not any("ewe" in u for u in units)
    ewe_plan = allocate_components(g, preset_config("ckks-ip-ewe"))
    ip = [cand for nd, cand in zip(g.nodes, ewe_plan.node_groups) if nd.detail == "IP" and nd.kind == "MAC"]
    assert all(name.endswith(".ewe") for cand in ip for name in cand)


def test_ckks_ntt_groups_use_nttu_and_tp():
    g = build_kernel_graph([Op("KeySwitch")], CkksDims(1 << 16, 23, 3))
    plan = allocate_components(g, HardwareConfig(n_clusters=1))
    ntt = [plan.groups[f"c0.ntt{i}"] for i in range(2)]
    assert [x.units for x in ntt] == [("c0.nttu0", "c0.tp0"), ("c0.nttu1", "c0.tp1")]


def test_pbs_set3_two_parallel_ntt_pipelines():
    c = preset_config("tfhe-wcu")
    g, plan, trace = sim([Op("PBS")], TFHE_SETS["Set-III"], c)
    assert len([k for k in plan.groups if ".ntt" in k]) == 2
    for name in ("c0.ntt0", "c0.ntt1"):
        assert any(".cu" in u for u in plan.groups[name].units)
    by_group = defaultdict(list)
    for nid, gname in enumerate(trace.node_group):
        if g.nodes[nid].kind == "NTT":
            by_group[gname].append((trace.node_start[nid], trace.node_finish[nid]))
    a, b = by_group["c0.ntt0"], by_group["c0.ntt1"]
    assert a and b
    assert any(s1 < e2 and s2 < e1 for (s1, e1) in a[:8] for (s2, e2) in b[:8])


# simulation -------------------------------------------------------------------------

def test_single_ntt_cycles():
    c = HardwareConfig(n_clusters=1)
    g = KernelGraph()
    g.add("NTT", "CKKS", 256, 256, 1024)
    trace = simulate(g, allocate_components(g, c), c)
    assert trace.total_cycles == 256 // c.lane_width + c.nttu_stages + c.fill_extra


def test_determinism():
    c = HardwareConfig()
    ops = [Op("HMult"), Op("Rescale"), Op("HRotate", 22), Op("HAdd", 22)]
    dims = CkksDims(1 << 14, 23, 3)
    first = trace_csv(sim(ops, dims, c)[2])
    assert trace_csv(sim(ops, dims, c)[2]) == first


def _conservation(trace):
    per_unit = defaultdict(list)
    for iv in trace.intervals:
        per_unit[iv.unit].append((iv.start, iv.end))
    for u, ivs in per_unit.items():
        assert sum(e - s for s, e in ivs) == trace.unit_busy[u]
        ivs.sort()
        assert all(e1 <= s2 for (_, e1), (s2, _) in zip(ivs, ivs[1:])), u
    assert all(trace.unit_busy[u] == 0 for u in trace.units if u not in per_unit)


@pytest.mark.parametrize("config,ops,dims", [
    (HardwareConfig(), [Op("HMult"), Op("Rescale"), Op("HRotate", 22)], CkksDims(1 << 14, 23, 3)),
    (preset_config("tfhe-wcu"), [Op("PBS", stream=s) for s in range(4)], SMALL_TFHE),
    (preset_config("tfhe-wocu"), [Op("PBS", stream=s) for s in range(4)], SMALL_TFHE),
])
def test_conservation_and_no_double_booking(config, ops, dims):
    _conservation(sim(ops, dims, config)[2])


def test_dependencies_respected():
    c = HardwareConfig()
    g, _, trace = sim([Op("HMult"), Op("Rescale")], CkksDims(1 << 13, 5, 2), c)
    for nd in g.nodes:
        for d in nd.deps:
            assert trace.node_start[nd.id] >= trace.node_finish[d]


def test_more_clusters_never_slower():
    ops = [Op("PBS", stream=s) for s in range(8)]
    prev = None
    for k in range(1, 9):
        cycles = sim(ops, SMALL_TFHE, HardwareConfig(n_clusters=k))[2].total_cycles
        if prev is not None:
            assert cycles <= prev, k
        prev = cycles


def test_plan_must_cover_graph():
    g = build_kernel_graph([Op("HAdd")], CkksDims(1 << 12, 3, 2))
    with pytest.raises(ValueError):
        simulate(g, allocate_components(KernelGraph(), HardwareConfig()), HardwareConfig())


# utilization ------------------------------------------------------------------------

def test_idle_trace_is_zero():
    rep = utilization_report(simulate(KernelGraph()))
    assert rep.total_cycles == 0 and rep.aggregate == 0.0
    assert set(rep.per_unit.values()) == {0.0}


def test_fully_packed_unit():
    unit = Unit("u", 0, "EWE", 1, capacity=512)
    trace = ScheduleTrace(10, [Interval(0, "Elementwise", "", "CKKS", "u", 0, 4),
                               Interval(1, "Elementwise", "", "CKKS", "u", 4, 10)], {"u": 10}, {"u": unit})
    rep = utilization_report(trace)
    assert rep.per_unit == {"u": 1.0} and rep.aggregate == 1.0 and rep.weighted == 1.0


def test_utilization_bounds():
    _, _, trace = sim(pbs_ops(preset_config("tfhe-wcu"), 4, 1), SMALL_TFHE, preset_config("tfhe-wcu"))
    rep = utilization_report(trace)
    assert all(0 <= u <= 1 for u in rep.per_unit.values())
    assert 0 < rep.aggregate <= 1 and 0 < rep.stage_weighted <= rep.weighted <= 1


def test_ckks_workload_utilization():
    assert ckks_workload(HardwareConfig()).utilization >= 0.48


# export -------------------------------------------------------------------------------

def test_trace_csv_and_summary():
    res, trace = run_ops("x", [Op("HAdd"), Op("PMult")], CkksDims(1 << 12, 3, 2), HardwareConfig(n_clusters=1))
    lines = trace_csv(trace).splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 1 + len(trace.intervals)
    summary = trace_summary(trace)
    assert summary["total_cycles"] == res.cycles == trace.total_cycles
    assert summary["aggregate_utilization"] == res.utilization
    json.dumps(summary)
    assert set(summary["per_unit"]) == set(trace.units)

import json

import pytest

from mmfhe import __version__, bench, cli
from mmfhe.archsim.config import ENV_VAR
from mmfhe.reporting import Check, Report, emit_report, parse_report

FAST = {
    "kernels": ["kernels", "--trials", "1"],
    "ckks": ["ckks-bench", "--set", "toy", "--circuits", "3"],
    "tfhe": ["tfhe-bench", "--set", "toy", "--trials", "20", "--gate-trials", "8"],
    "convert": ["convert-bench", "--set", "toy", "--slots", "2,8"],
    "ntt": ["ntt-util"],
    "breakdown": ["breakdown"],
    "pbs": ["simulate", "--workload", "pbs", "--streams", "2", "--rounds", "1"],
    "scaling": ["simulate", "--workload", "scaling"],
}


def run(capsys, argv):
    rc = cli.main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.mark.parametrize("name", sorted(FAST))
def test_fast_commands_succeed_and_parse(capsys, name):
    rc, out, err = run(capsys, FAST[name] + ["--check"])
    assert rc == 0, err
    rep = parse_report(out)
    assert rep.command == FAST[name][0]
    assert rep.version == __version__
    assert rep.seed == 0
    assert len(rep.params_hash) == 32
    int(rep.params_hash, 16)
    assert rep.rows and rep.passed
    assert all(len(r) == len(rep.columns) for r in rep.rows)
    # timing is on stderr, never in the report
    assert " s\n" in err and " s\n" not in out


@pytest.mark.parametrize("name", sorted(FAST))
def test_same_seed_byte_identical(capsys, tmp_path, name):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run(capsys, FAST[name] + ["--seed", "5", "--out", str(p)])[0] == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_seed_changes_randomized_report(capsys):
    _, a, _ = run(capsys, FAST["ckks"] + ["--seed", "1"])
    _, b, _ = run(capsys, FAST["ckks"] + ["--seed", "2"])
    assert a != b
    assert parse_report(a).params_hash == parse_report(b).params_hash


def test_json_output_round_trip(capsys):
    rc, out, _ = run(capsys, FAST["breakdown"] + ["--format", "json"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["header"]["command"] == "breakdown"
    rep = parse_report(out, "json")
    assert rep == parse_report(emit_report(rep, "csv"))


def test_csv_round_trip_is_identity_on_normalized_report():
    r = Report("x", 3, "00ff", ("a", "b", "c"), [(1, 0.123456789, "s"), (2, -1e-9, "t,u")],
               [Check("c1", True, 0.5, "<= 1"), Check("c2", False, 2.0, "== 1")])
    for fmt in ("csv", "json"):
        assert parse_report(emit_report(r, fmt), fmt) == r.normalized()


def test_empty_report_is_header_only():
    text = emit_report(Report("x", 0, "ab", ("a", "b")))
    lines = text.splitlines()
    assert lines[-1] == "a,b"
    assert all(l.startswith("# ") for l in lines[:-1])
    assert parse_report(text).rows == []


def test_floats_have_six_significant_digits(capsys):
    _, out, _ = run(capsys, FAST["breakdown"])
    row = out.splitlines()[-1].split(",")
    assert row[1] == f"{float(row[1]):.6g}"
    assert len(row[1].replace("0.", "", 1)) <= 6


def test_breakdown_rows_match_scenario_enumeration(capsys):
    names = {
        "all": ["CKKS KeySwitch L=23 dnum=3", "TFHE PBS Set-I", "TFHE PBS Set-II", "TFHE PBS Set-III",
                "TFHE PBS average"],
        "keyswitch": ["CKKS KeySwitch L=23 dnum=3"],
        "pbs": ["TFHE PBS Set-I", "TFHE PBS Set-II", "TFHE PBS Set-III", "TFHE PBS average"],
    }
    for op, want in names.items():
        rc, out, _ = run(capsys, ["breakdown", "--op", op])
        assert rc == 0
        assert [r[0] for r in parse_report(out).rows] == want


def test_breakdown_example_row(capsys):
    rc, out, _ = run(capsys, ["breakdown", "--op", "keyswitch", "--L", "23", "--dnum", "3", "--check"])
    assert rc == 0
    row = parse_report(out).rows[0]
    assert abs(row[1] - 0.592) <= 0.05


def test_ntt_util_axes(capsys):
    _, out, _ = run(capsys, ["ntt-util", "--config", "default"])
    rep = parse_report(out)
    assert rep.columns == ("strategy", "n", "utilization")
    assert {r[0] for r in rep.rows} == {"F1Like", "FABLike", "Hetero"}
    assert {r[1] for r in rep.rows} == {1 << k for k in range(8, 17)}


def test_check_failure_exits_1(capsys, monkeypatch):
    monkeypatch.setattr(bench, "KEYSWITCH_TARGET", 0.9)
    rc, out, err = run(capsys, ["breakdown", "--check"])
    assert rc == 1
    assert "FAIL keyswitch_ntt_fraction" in err
    assert "|FAIL|" in out
    # without --check the same report still exits 0
    assert run(capsys, ["breakdown"])[0] == 0


@pytest.mark.parametrize("argv", [
    [],
    ["nope"],
    ["breakdown", "--op", "bogus"],
    ["breakdown", "--L", "-1"],
    ["breakdown", "--L", "0"],
    ["tfhe-bench", "--set", "Set-IX"],
    ["ckks-bench", "--set", "huge"],
    ["convert-bench", "--slots", "3"],
    ["convert-bench", "--slots", "a,b"],
    ["ckks-bench", "--set", "default"],
    ["ntt-util", "--config", "/nonexistent/file.cfg"],
    ["simulate", "--workload", "scaling", "--trace", "t.csv"],
    ["breakdown", "--format", "xml"],
])
def test_bad_arguments_exit_2(capsys, argv):
    assert run(capsys, argv)[0] == 2


def test_bad_config_contents_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("n_clusters = banana\n")
    assert run(capsys, ["ntt-util", "--config", str(p)])[0] == 2


def test_unwritable_out_exit_2(capsys, tmp_path):
    rc, _, err = run(capsys, ["breakdown", "--out", str(tmp_path / "missing" / "r.csv")])
    assert rc == 2
    assert "cannot write" in err


def test_config_env_var(capsys, monkeypatch, tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("n_clusters = 2\n")
    monkeypatch.setenv(ENV_VAR, str(p))
    _, out, _ = run(capsys, FAST["pbs"])
    assert parse_report(out).rows[0][2] == 2
    monkeypatch.setenv(ENV_VAR, str(tmp_path / "gone.cfg"))
    assert run(capsys, FAST["pbs"])[0] == 2


def test_simulate_trace_and_summary(capsys, tmp_path):
    t, s = tmp_path / "trace.csv", tmp_path / "sum.json"
    rc, out, _ = run(capsys, FAST["pbs"] + ["--trace", str(t), "--summary", str(s)])
    assert rc == 0
    lines = t.read_text().splitlines()
    assert len(lines) > 1
    summary = json.loads(s.read_text())
    assert summary
    cycles = parse_report(out).rows[0][4]
    end = lines[0].split(",").index("end")
    # results become usable a pipeline fill after the last busy interval
    assert max(int(l.split(",")[end]) for l in lines[1:]) <= cycles
    # same run again gives the same artifacts
    t2, s2 = tmp_path / "trace2.csv", tmp_path / "sum2.json"
    run(capsys, FAST["pbs"] + ["--trace", str(t2), "--summary", str(s2)])
    assert t.read_bytes() == t2.read_bytes() and s.read_bytes() == s2.read_bytes()


def test_ckks_simulate_check(capsys):
    rc, out, _ = run(capsys, ["simulate", "--workload", "ckks", "--streams", "1", "--rounds", "1", "--check"])
    rep = parse_report(out)
    assert [c.name for c in rep.checks] == ["ckks_utilization"]
    assert rc == (0 if rep.passed else 1)


def test_scaling_check_exact(capsys):
    rc, out, _ = run(capsys, FAST["scaling"] + ["--check"])
    assert rc == 0
    rep = parse_report(out)
    full, one = rep.rows
    assert full[2] == 4 and one[2] == 1
    assert full[3] == 4 * one[3] and full[4] == one[4]

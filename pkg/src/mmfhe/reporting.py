"""Report tables shared by the CLI and the acceptance tests.

A report is a header (tool version, command, seed, params hash), a table with
fixed columns, and an optional list of pass/fail checks.  Floats are written
with 6 significant digits and nothing time dependent goes into a report, so
the same command and seed always give the same bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field, replace

from . import __version__
from .errors import FheError

TOOL = "mmfhe"


class IoError(FheError, OSError):
    """A report or trace could not be written."""


def fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite value {x} in report")
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _norm(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return float(fmt_float(v))
    if hasattr(v, "item"):  # numpy scalar
        return _norm(v.item())
    return v


def _cell(v) -> str:
    v = _norm(v)
    return fmt_float(v) if isinstance(v, float) else str(v)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    target: str

    @property
    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {_cell(self.value)} (want {self.target})"


@dataclass
class Report:
    command: str
    seed: int
    params_hash: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    version: str = __version__

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def normalized(self) -> "Report":
        """The report as it reads back after emit: floats cut to 6 digits."""
        return replace(self, columns=tuple(self.columns),
                       rows=[tuple(_norm(v) for v in r) for r in self.rows],
                       checks=[replace(c, passed=bool(c.passed), value=_norm(float(c.value))) for c in self.checks])

    def header(self) -> dict:
        return {"tool": TOOL, "version": self.version, "command": self.command,
                "seed": self.seed, "params_hash": self.params_hash}


# emit -------------------------------------------------------------------------------

def _emit_csv(r: Report) -> str:
    buf = io.StringIO()
    for k, v in r.header().items():
        buf.write(f"# {k}: {v}\n")
    for c in r.checks:
        buf.write(f"# check: {c.name}|{'PASS' if c.passed else 'FAIL'}|{_cell(c.value)}|{c.target}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(r.columns)
    for row in r.rows:
        if len(row) != len(r.columns):
            raise ValueError(f"row {row} does not match columns {r.columns}")
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit_json(r: Report) -> str:
    n = r.normalized()
    doc = {
        "header": n.header(),
        "columns": list(n.columns),
        "rows": [list(row) for row in n.rows],
        "checks": [{"name": c.name, "passed": c.passed, "value": c.value, "target": c.target} for c in n.checks],
    }
    return json.dumps(doc, indent=2) + "\n"


def emit_report(report: Report, fmt: str = "csv") -> str:
    if fmt == "csv":
        return _emit_csv(report)
    if fmt == "json":
        return _emit_json(report)
    raise ValueError(f"unknown report format {fmt!r}")


def write_text(path: str | os.PathLike, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e.strerror or e}") from e


def write_report(report: Report, path: str | os.PathLike, fmt: str = "csv") -> None:
    write_text(path, emit_report(report, fmt))


# parse ------------------------------------------------------------------------------

def _value(s: str):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def _parse_csv(text: str) -> Report:
    head: dict[str, str] = {}
    checks = []
    body = []
    for line in text.splitlines(keepends=True):
        if line.startswith("# "):
            key, _, val = line[2:].rstrip("\n").partition(": ")
            if key == "check":
                name, status, value, target = val.split("|", 3)
                checks.append(Check(name, status == "PASS", float(value), target))
            else:
                head[key] = val
        else:
            body.append(line)
    table = list(csv.reader(body))
    if not table:
        raise ValueError("report has no column row")
    return Report(head["command"], int(head["seed"]), head["params_hash"], tuple(table[0]),
                  [tuple(_value(c) for c in row) for row in table[1:]], checks, head["version"])


def _parse_json(text: str) -> Report:
    doc = json.loads(text)
    h = doc["header"]
    return Report(h["command"], h["seed"], h["params_hash"], tuple(doc["columns"]),
                  [tuple(r) for r in doc["rows"]],
                  [Check(c["name"], c["passed"], float(c["value"]), c["target"]) for c in doc["checks"]],
                  h["version"])


def parse_report(text: str, fmt: str = "csv") -> Report:
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "json":
        return _parse_json(text)
    raise ValueError(f"unknown report format {fmt!r}")

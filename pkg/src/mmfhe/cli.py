"""Command line harness.

    mmfhe kernels       NTT/iNTT and four-step checks against oracles
    mmfhe ckks-bench    random depth <= 2 CKKS circuits vs plaintext evaluation
    mmfhe tfhe-bench    PBS identity and NAND gate trials
    mmfhe convert-bench CKKS -> LWE -> CKKS round trip per n_slot
    mmfhe ntt-util      NTT unit utilization per (strategy, N)
    mmfhe breakdown     NTT / MAC / other fractions of KeySwitch and PBS
    mmfhe simulate      run a workload through the accelerator model

Exit status: 0 on success, 2 on bad arguments or unwritable outputs, 1 when
``--check`` is given and a check fails.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import bench
from .archsim import load_config
from .archsim.config import ENV_VAR
from .archsim.scenarios import TFHE_SETS
from .errors import FormatError
from .reporting import IoError, Report, emit_report, write_text

CKKS_SETS = ("toy", "desk", "conv")
CKKS_FULL_SET = "default"
TFHE_BENCH_SETS = ("toy",) + tuple(TFHE_SETS)


class UsageError(Exception):
    pass


def _positive(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"{s} is negative")
    return v


def _slots(s: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in s.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad slot list {s!r}") from None
    if not vals or any(v < 1 or v & (v - 1) for v in vals):
        raise argparse.ArgumentTypeError("slot counts must be powers of two")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_positive, default=0, help="RNG seed (default 0)")
    common.add_argument("--config", default=None,
                        help=f"hardware config file or preset name (default ${ENV_VAR}, else 'default')")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="report path (default stdout)")
    common.add_argument("--check", action="store_true", help="exit 1 if any acceptance check fails")
    common.add_argument("--full", action="store_true", help="run the full-size variant of the workload")

    p = argparse.ArgumentParser(prog="mmfhe", description="FHE kernel, scheme and accelerator-model harness")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernels", parents=[common], help="NTT kernel checks against oracles")
    k.add_argument("--trials", type=_positive, default=4)

    c = sub.add_parser("ckks-bench", parents=[common], help="random CKKS circuits")
    c.add_argument("--set", choices=CKKS_SETS + (CKKS_FULL_SET,), default=None,
                   help="parameter set (default desk; 'default' needs --full)")
    c.add_argument("--circuits", type=_positive, default=50)

    t = sub.add_parser("tfhe-bench", parents=[common], help="PBS and NAND trials")
    t.add_argument("--set", choices=TFHE_BENCH_SETS, default="Set-I")
    t.add_argument("--trials", type=_positive, default=1000)
    t.add_argument("--gate-trials", type=_positive, default=400)

    v = sub.add_parser("convert-bench", parents=[common], help="scheme conversion round trip")
    v.add_argument("--set", choices=CKKS_SETS, default=None, help="parameter set (default desk, conv with --full)")
    v.add_argument("--slots", type=_slots, default=bench.CONVERT_SLOTS, help="comma separated n_slot values")

    sub.add_parser("ntt-util", parents=[common], help="NTT utilization sweep")

    b = sub.add_parser("breakdown", parents=[common], help="NTT / MAC fractions")
    b.add_argument("--op", choices=bench.BREAKDOWN_OPS, default="all")
    b.add_argument("--L", dest="levels", type=_positive, default=23)
    b.add_argument("--dnum", type=_positive, default=3)

    s = sub.add_parser("simulate", parents=[common], help="accelerator model run")
    s.add_argument("--workload", choices=bench.SIM_WORKLOADS, default="pbs")
    s.add_argument("--set", choices=tuple(TFHE_SETS), default="Set-I")
    s.add_argument("--streams", type=_positive, default=None)
    s.add_argument("--rounds", type=_positive, default=None)
    s.add_argument("--trace", default=None, help="write the per-unit schedule as CSV")
    s.add_argument("--summary", default=None, help="write the JSON utilization summary")
    return p


def _run(args) -> tuple[Report, list[tuple[str, str]]]:
    """The report plus any extra (path, text) artifacts to write."""
    cmd = args.command
    extra: list[tuple[str, str]] = []
    if cmd == "kernels":
        return bench.kernel_report(args.seed, trials=args.trials), extra
    if cmd == "ckks-bench":
        name = args.set or (CKKS_FULL_SET if args.full else "desk")
        if name == CKKS_FULL_SET and not args.full:
            raise UsageError("--set default is the full-size set; pass --full")
        return bench.ckks_report(args.seed, name, args.circuits), extra
    if cmd == "tfhe-bench":
        return bench.tfhe_report(args.seed, args.set, args.trials, args.gate_trials), extra
    if cmd == "convert-bench":
        return bench.convert_report(args.seed, args.set or ("conv" if args.full else "desk"), args.slots), extra
    if cmd == "ntt-util":
        return bench.ntt_util_report(load_config(args.config), args.seed), extra
    if cmd == "breakdown":
        if args.levels < 1 or args.dnum < 1:
            raise UsageError("--L and --dnum must be positive")
        return bench.breakdown_report(args.op, args.levels, args.dnum, args.seed), extra
    if cmd == "simulate":
        if (args.trace or args.summary) and args.workload not in ("pbs", "ckks"):
            raise UsageError("--trace/--summary need a single-run workload (pbs or ckks)")
        out = bench.simulate_report(load_config(args.config), args.workload, args.set,
                                    args.streams, args.rounds, args.seed)
        if args.trace:
            extra.append((args.trace, out.trace_csv))
        if args.summary:
            extra.append((args.summary, json.dumps(_rounded(out.summary), indent=2, sort_keys=True) + "\n"))
        return out.report, extra
    raise UsageError(f"unknown command {cmd}")


def _rounded(x):
    if isinstance(x, float):
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: _rounded(v) for k, v in x.items()}
    return x


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    t0 = time.perf_counter()
    try:
        report, extra = _run(args)
        text = emit_report(report, args.format)
        if args.out:
            write_text(args.out, text)
        else:
            sys.stdout.write(text)
        for path, body in extra:
            write_text(path, body)
    except (UsageError, FormatError, IoError) as e:
        print(f"mmfhe {args.command}: {e}", file=sys.stderr)
        return 2
    # timing goes to stderr only so reports stay byte-identical
    print(f"mmfhe {args.command}: {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    for c in report.checks:
        print(c.line, file=sys.stderr)
    if args.check and not report.passed:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

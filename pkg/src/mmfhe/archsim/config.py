"""Hardware inventory and the key = value configuration file.

File format: one ``key = value`` per line, ``#`` starts a comment, lists are
comma separated.  Unknown keys are an error so typos do not go unnoticed.
The default path comes from the ``ENV_VAR`` environment variable when no path is given.
"""
from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import FormatError

ENV_VAR = "TRINITY_SIM_CONFIG"


@dataclass(frozen=True)
class HardwareConfig:
    name: str = "default"
    n_clusters: int = 4
    freq_ghz: float = 1.0
    word_bits: int = 36
    # Group 0
    nttu_count: int = 2
    nttu_rows: int = 128  # M; an NTTU is a 2M-point pipeline of log2(2M) stages
    tp_count: int = 2
    # Group 1
    cu_enabled: bool = True
    cu_columns: tuple[int, ...] = (1, 2, 2, 2, 2, 3)
    cu_rows: int = 128  # n_r
    cu_ntt_factor: int = 2  # NTT role: factor * n_r elements per cycle
    cu_mac_factor: int = 1  # MAC role: factor * n_r elements per cycle per column
    sa_depth: int = 0  # fixed systolic array (columns) used when CUs are disabled
    ip_on_ewe: bool = False
    # Group 2
    autou_count: int = 1
    rotator_count: int = 1
    ewe_count: int = 1
    vpu_count: int = 1
    lane_width: int = 256
    ewe_lanes: int = 512
    vpu_macs: int = 1024
    # memory and interconnect
    local_buffer_mb: float = 2.81
    local_buffer_tbps: float = 11.25
    scratchpad_mb: float = 45.0
    scratchpad_tbps: float = 9.0
    noc_bytes_per_cycle: int = 4096
    hbm_stacks: int = 2
    hbm_tbps: float = 1.0
    # timing
    fill_extra: int = 4

    def __post_init__(self):
        if self.n_clusters < 1:
            raise FormatError("n_clusters must be positive")
        if self.nttu_rows < 1 or self.nttu_rows & (self.nttu_rows - 1):
            raise FormatError("nttu_rows must be a power of two")
        if any(c < 1 for c in self.cu_columns):
            raise FormatError("CU column counts must be positive")

    @property
    def nttu_points(self) -> int:
        return 2 * self.nttu_rows

    @property
    def nttu_stages(self) -> int:
        return self.nttu_points.bit_length() - 1

    @property
    def active_cus(self) -> tuple[int, ...]:
        return self.cu_columns if self.cu_enabled else ()

    @property
    def word_bytes(self) -> float:
        return self.word_bits / 8

    @property
    def hbm_bytes_per_cycle(self) -> float:
        return self.hbm_tbps * 1e12 / (self.freq_ghz * 1e9)

    def replace(self, **kw) -> "HardwareConfig":
        return dataclasses.replace(self, **kw)

    def dumps(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:32]


_FIELDS = {f.name: f for f in dataclasses.fields(HardwareConfig)}


def _convert(key: str, raw: str):
    default = getattr(HardwareConfig(), key)
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if isinstance(default, tuple):
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise FormatError(f"bad value for {key}: {raw!r}") from None


def parse_config(text: str) -> HardwareConfig:
    values = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"line {n}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise FormatError(f"line {n}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return HardwareConfig(**values)


PRESET_FILES = {
    "default": "default.cfg",
    "tfhe-wcu": "tfhe_wcu.cfg",
    "tfhe-wocu": "tfhe_wocu.cfg",
    "ckks-ip-ewe": "ckks_ip_ewe.cfg",
}


def preset_config(name: str) -> HardwareConfig:
    try:
        fname = PRESET_FILES[name]
    except KeyError:
        raise FormatError(f"unknown config preset {name!r}") from None
    return parse_config(resources.files("mmfhe").joinpath("configs", fname).read_text())


def load_config(path: str | os.PathLike | None = None) -> HardwareConfig:
    """Load a config file, a preset name, or (with no argument) the file named
    by the ``ENV_VAR`` environment variable, falling back to the default preset."""
    if path is None:
        path = os.environ.get(ENV_VAR) or "default"
    if str(path) in PRESET_FILES:
        return preset_config(str(path))
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"config file {p} not found")
    return parse_config(p.read_text())

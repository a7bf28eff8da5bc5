"""Run configuration for the command-line tool.

A TOML file may set any subset of the fields; unknown keys are errors::

    bandwidth = 128
    stride = 5
    tau = 1.5
    subcell = false
    seed = 0
    jobs = 1
    pair_mode = "stride"      # or "every"
    hold_outliers = false

    [grid]                    # GridConfig fields
    grid_size = 256
    cell_size = 0.75

    [nms]
    k = 5
    radius = 3
    rel_threshold = 0.3

    [paths]
    input_dir = "scans"
    output_dir = "out"

Command-line flags override the file.
"""
from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field, fields, replace

from .grid import GridConfig
from .odometry import PAIR_MODES
from .registration import RegistrationConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NmsConfig:
    k: int = 5
    radius: int = 3
    rel_threshold: float = 0.3


@dataclass(frozen=True)
class PathsConfig:
    input_dir: str = ""
    output_dir: str = ""


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    bandwidth: int = 128
    stride: int = 5
    tau: float = 1.5
    nms: NmsConfig = field(default_factory=NmsConfig)
    subcell: bool = False
    paths: PathsConfig = field(default_factory=PathsConfig)
    seed: int = 0
    jobs: int = 1
    pair_mode: str = "stride"
    hold_outliers: bool = False

    def __post_init__(self):
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.pair_mode not in PAIR_MODES:
            raise ConfigError(f"pair_mode must be one of {PAIR_MODES}")
        try:
            self.registration()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def registration(self) -> RegistrationConfig:
        return RegistrationConfig(grid=self.grid, bandwidth=self.bandwidth, tau=self.tau,
                                  nms_k=self.nms.k, nms_radius=self.nms.radius,
                                  rel_threshold=self.nms.rel_threshold, subcell=self.subcell)

    def to_dict(self, execution: bool = False) -> dict:
        """Fields as plain data. ``jobs`` only changes wall time, so it is left
        out unless ``execution`` is set; documents stay identical across worker counts."""
        doc = asdict(self)
        if not execution:
            del doc["jobs"]
        return doc


_SECTIONS = {"grid": GridConfig, "nms": NmsConfig, "paths": PathsConfig}


def _build(cls, table: dict, where: str):
    if not isinstance(table, dict):
        raise ConfigError(f"[{where}] must be a table")
    names = {f.name for f in fields(cls)}
    extra = sorted(set(table) - names)
    if extra:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(extra)}")
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{where}]: {exc}") from None


def config_from_dict(doc: dict, base: RunConfig | None = None) -> RunConfig:
    """Overlay ``doc`` on ``base`` (defaults when omitted)."""
    base = base or RunConfig()
    top = {f.name for f in fields(RunConfig)}
    extra = sorted(set(doc) - top)
    if extra:
        raise ConfigError(f"unknown key(s): {', '.join(extra)}")
    updates = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            merged = {**asdict(getattr(base, key)), **value} if isinstance(value, dict) else value
            updates[key] = _build(_SECTIONS[key], merged, key)
        else:
            updates[key] = value
    try:
        return replace(base, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    return config_from_dict(doc)

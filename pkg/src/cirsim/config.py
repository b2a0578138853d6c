"""JSON run configuration.

One document with optional sections ``link``, ``highway``, ``surface``,
``sweep``, ``chamber`` and ``phase``; every omitted key takes the
default of the corresponding dataclass, so ``{}`` reproduces the
reference highway and chamber setups.
"""

from __future__ import annotations

import dataclasses
import json
import math
import typing
from dataclasses import dataclass
from pathlib import Path

from .channel import LinkParams
from .em_field import ChamberConfig
from .experiment import SurfaceSpec, SweepConfig
from .scenario import HighwayConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PhaseJob:
    """What the ``phase`` subcommand writes."""

    surface: str = "highway"      # "highway" | "chamber"
    design: str = "mirror"        # "mirror" | "general" | "zero"
    theta_bar_deg: float | None = None
    theta_in_deg: float = -80.0
    phi_in_deg: float = 90.0
    theta_out_deg: float = 80.0
    phi_out_deg: float = 90.0
    levels: int | None = None

    def __post_init__(self):
        if self.surface not in ("highway", "chamber"):
            raise ValueError(f"unknown surface {self.surface!r}")
        if self.design not in ("mirror", "general", "zero"):
            raise ValueError(f"unknown design {self.design!r}")
        if self.levels is not None and self.levels < 2:
            raise ValueError("levels must be >= 2")


@dataclass(frozen=True)
class RunConfig:
    sweep: SweepConfig
    chamber: ChamberConfig
    phase: PhaseJob


def _coerce(value, tp, where):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union or (origin is not None and type(None) in args):
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"{where}: null not allowed")
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], where)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            if value in ("inf", "Infinity"):
                return math.inf
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return tuple(_coerce(v, args[0], f"{where}[{i}]") for i, v in enumerate(value))
    raise ConfigError(f"{where}: unsupported field type {tp}")


def _build(cls, data, where, **nested):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    kwargs = dict(nested)
    for key, value in data.items():
        if key in nested:
            continue
        kwargs[key] = _coerce(value, hints[key], f"{where}.{key}")
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    known = {"link", "highway", "surface", "sweep", "chamber", "phase"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown section(s) {', '.join(unknown)}")
    link = _build(LinkParams, doc.get("link"), "link")
    highway = _build(HighwayConfig, doc.get("highway"), "highway")
    surface = _build(SurfaceSpec, doc.get("surface"), "surface")
    sweep_doc = doc.get("sweep") or {}
    for sect in ("link", "highway", "surface"):
        if isinstance(sweep_doc, dict) and sect in sweep_doc:
            raise ConfigError(f"sweep.{sect}: give it as a top-level section")
    sweep = _build(SweepConfig, sweep_doc, "sweep", link=link, highway=highway, surface=surface)
    chamber = _build(ChamberConfig, doc.get("chamber"), "chamber")
    phase = _build(PhaseJob, doc.get("phase"), "phase")
    return RunConfig(sweep, chamber, phase)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    sweep = dataclasses.asdict(cfg.sweep)
    doc = {
        "link": sweep.pop("link"),
        "highway": sweep.pop("highway"),
        "surface": sweep.pop("surface"),
        "sweep": sweep,
        "chamber": dataclasses.asdict(cfg.chamber),
        "phase": dataclasses.asdict(cfg.phase),
    }
    return json.loads(json.dumps(doc, default=list))

"""Versioned run configurations for the CLI, validated with pydantic.

Every model forbids unknown keys. A config file must carry
``"schema_version": 1``; omitted fields take the defaults below, which
reproduce the canonical runs.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticError

from .errors import QProbeError

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240601

Point = tuple[float, float]
Number = Union[float, tuple[float, float]]


class ConfigError(QProbeError):
    """Unreadable or invalid config file (CLI exit code 2)."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class _Base(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2**64)


class GeometryConfig(_Base):
    G: Point = (0.0, 0.0)
    L: Point = (-5.0, 100.0)
    R: Point = (5.0, 100.0)
    screen_from: Point = (-40.0, 200.0)
    screen_to: Point = (40.0, 200.0)
    samples: int = Field(2001, ge=2)
    b: float = 2 * math.pi
    # half-width of the visibility window; None means 1.5 predicted spacings
    window: Optional[float] = Field(None, gt=0)


class TwoSlitConfig(GeometryConfig):
    rule: Literal["A", "B", "both"] = "both"


class EswConfig(GeometryConfig):
    pass


class ScheduleEntry(_Strict):
    duration: float = Field(ge=0)
    matrix: list


def _rabi_schedule(omega: float = 1.0) -> list[ScheduleEntry]:
    return [ScheduleEntry(duration=2 * math.pi / omega, matrix=[[0, omega / 2], [omega / 2, 0]])]


class EvolveConfig(_Base):
    initial: list[Number] = [1.0, 0.0]
    schedule: list[ScheduleEntry] = Field(default_factory=_rabi_schedule, min_length=1)
    samples_per_segment: int = Field(100, ge=1)
    # measurement basis as columns; None means the standard basis
    basis: Optional[list] = None
    hbar: float = Field(1.0, gt=0)


class GridConfig(_Strict):
    x_min: float = -20.0
    x_max: float = 20.0
    n: int = Field(512, ge=16, le=4096)


class PacketConfig(_Strict):
    type: Literal["gaussian"] = "gaussian"
    x0: float = 0.0
    sigma0: float = Field(1.0, gt=0)
    k0: float = 0.0


class PotentialConfig(_Strict):
    type: Literal["free", "constant", "harmonic", "tabulated"] = "free"
    params: dict = Field(default_factory=dict)


class PathintConfig(_Base):
    grid: GridConfig = GridConfig()
    mass: float = Field(1.0, gt=0)
    packet: PacketConfig = PacketConfig()
    potential: PotentialConfig = PotentialConfig()
    dt: float = Field(1e-3, gt=0)
    steps: int = Field(1000, ge=1)
    snapshot_every: int = Field(100, ge=1)
    # (a, b): extra slice factor exp((a + ib) dt) for the stability scan
    stability: Optional[tuple[float, float]] = None


class CheckRunConfig(_Base):
    trials: int = Field(1000, ge=1)
    suites: Optional[list[str]] = None
    inject_fault: bool = False


MODELS = {
    "twoslit": TwoSlitConfig,
    "esw": EswConfig,
    "evolve": EvolveConfig,
    "pathint": PathintConfig,
    "check": CheckRunConfig,
}


def _describe(exc: PydanticError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"  {loc}: {err['msg']}")
    return "\n".join(lines)


def load_config(command: str, path: str | Path | None = None, overrides: dict | None = None):
    """Build the config model for ``command`` from an optional JSON file plus overrides."""
    model = MODELS[command]
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        if "schema_version" not in data:
            raise ConfigError(f"{path}: missing schema_version (expected {SCHEMA_VERSION})")
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return model.model_validate(data)
    except PydanticError as exc:
        raise ConfigError(f"invalid {command} config:\n{_describe(exc)}") from None

"""JSON project configuration: schema, parsing and canonical echo.

Units are SI and implicit: meters, radians, seconds, Hz.  Intervals are
``[lo, hi]``; ``null`` stands for an unbounded side.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

import jsonschema

from .errors import ConfigError, ContainmentError, LocreqError
from .requirements import LocalizationFunctionSpec, LocalizationType
from .spatial import AXES, AxisSpace, DofMask, MarginVector, RigidTransform, requirement_margin
from .uncertainty import (
    ConfidenceLevel,
    ErrorPercentiles,
    IlsSpec,
    StaticBasis,
    UpdateModel,
    UpdateType,
    VelocityBound,
)

DEFAULT_GRID = (0.1, 0.6, 0.1)
TRAJECTORY_MODES = ("worst_case", "random")

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_bound = {"type": ["number", "null"]}
_axis_keys = {"propertyNames": {"enum": list(AXES)}, "minProperties": 1}
_axis_map = {"type": "object", **_axis_keys, "additionalProperties": _nonneg}
_space = {
    "type": "object",
    **_axis_keys,
    "additionalProperties": {"type": "array", "items": _bound, "minItems": 2, "maxItems": 2},
}
_confidence = {
    "oneOf": [
        {"type": "object", "required": ["sigma"], "properties": {"sigma": _num},
         "additionalProperties": False},
        {"type": "object", "required": ["percentile"], "properties": {"percentile": _num},
         "additionalProperties": False},
    ]
}
_update = {
    "oneOf": [
        {"type": "object", "required": ["type", "rate_hz"],
         "properties": {"type": {"const": "periodic"}, "rate_hz": {"type": "number", "exclusiveMinimum": 0}},
         "additionalProperties": False},
        {"type": "object", "required": ["type"],
         "properties": {"type": {"enum": ["on_request", "on_event"]}},
         "additionalProperties": False},
    ]
}
_percentiles = {
    "type": "object",
    "required": ["confidence"],
    "properties": {a: _nonneg for a in AXES} | {"confidence": _confidence},
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["function"],
    "additionalProperties": False,
    "properties": {
        "function": {
            "type": "object",
            "required": ["name", "entity", "localization_type", "dof", "interest_space",
                         "motion_space", "safety_margin", "reference_basis", "confidence",
                         "max_velocity", "realtime_required", "transform_L_to_I"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "entity": {"type": "string"},
                "localization_type": {"enum": ["absolute", "relative"]},
                "dof": {"type": "array", "items": {"enum": list(AXES)}, "minItems": 1,
                        "uniqueItems": True},
                "interest_space": _space,
                "motion_space": _space,
                "safety_margin": _axis_map,
                "reference_basis": {"enum": ["ground_truth", "same_system_map"]},
                "confidence": _confidence,
                "max_velocity": _axis_map,
                "realtime_required": {"type": "boolean"},
                "transform_L_to_I": {
                    "type": "object",
                    "required": ["translation", "yaw_offset"],
                    "additionalProperties": False,
                    "properties": {
                        "translation": {"type": "array", "items": _num, "minItems": 3, "maxItems": 3},
                        "yaw_offset": _num,
                    },
                },
            },
        },
        "derive": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "update": _update,
                "latency_s": _nonneg,
                "yaw_percentile": _nonneg,
            },
        },
        "ils": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "accuracy", "update", "latency_s"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "accuracy": _percentiles,
                    "repeatability": _percentiles,
                    "update": _update,
                    "latency_s": _nonneg,
                },
            },
        },
        "simulation": {
            "type": "object",
            "required": ["trials", "seed"],
            "additionalProperties": False,
            "properties": {
                "trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "trajectory": {"enum": list(TRAJECTORY_MODES)},
                "cycles": {"type": "integer", "minimum": 1},
                "update": _update,
                "latency_s": _nonneg,
                "budget_scale": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "tabulate": {
            "type": "object",
            "required": ["start_s", "stop_s", "step_s"],
            "additionalProperties": False,
            "properties": {
                "start_s": _nonneg,
                "stop_s": _nonneg,
                "step_s": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


@dataclass(frozen=True)
class DeriveSettings:
    update: UpdateModel = field(default_factory=UpdateModel.on_request)
    latency_s: float = 0.0
    yaw_percentile: float | None = None


@dataclass(frozen=True)
class SimulationSettings:
    trials: int
    seed: int
    trajectory: str = "worst_case"
    cycles: int = 100
    update: UpdateModel | None = None
    latency_s: float | None = None
    budget_scale: float = 1.0


@dataclass(frozen=True)
class TabulateGrid:
    start_s: float
    stop_s: float
    step_s: float

    def values(self) -> tuple[float, ...]:
        """Grid points, rounded to kill accumulated float drift."""
        n = int(math.floor((self.stop_s - self.start_s) / self.step_s + 1e-9)) + 1
        return tuple(round(self.start_s + i * self.step_s, 12) for i in range(max(n, 0)))


@dataclass(frozen=True)
class ProjectConfig:
    function: LocalizationFunctionSpec
    derive: DeriveSettings = field(default_factory=DeriveSettings)
    ils: tuple[IlsSpec, ...] = ()
    simulation: SimulationSettings | None = None
    tabulate: TabulateGrid | None = None

    def with_overrides(self, seed: int | None = None, trials: int | None = None) -> "ProjectConfig":
        if self.simulation is None or (seed is None and trials is None):
            return self
        sim = self.simulation
        return replace(self, simulation=replace(
            sim,
            seed=sim.seed if seed is None else seed,
            trials=sim.trials if trials is None else trials,
        ))


def _json_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _at(path: str, fn: Callable, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConfigError:
        raise
    except (LocreqError, ValueError, TypeError) as err:
        detail = err.detail if isinstance(err, LocreqError) else str(err)
        sub = f"{path}.{err.axis}" if isinstance(err, LocreqError) and err.axis else path
        raise ConfigError(detail, path=sub, step=getattr(err, "step", None)) from err


def _interval(iv) -> tuple[float, float]:
    lo, hi = iv
    return (-math.inf if lo is None else float(lo), math.inf if hi is None else float(hi))


def _space(d: Mapping) -> AxisSpace:
    return AxisSpace.from_mapping({a: _interval(iv) for a, iv in d.items()})


def _confidence(d: Mapping) -> ConfidenceLevel:
    if "sigma" in d:
        return ConfidenceLevel.from_sigma(d["sigma"])
    return ConfidenceLevel.from_percentile(d["percentile"])


def _update(d: Mapping) -> UpdateModel:
    if d["type"] == "periodic":
        return UpdateModel.periodic(d["rate_hz"])
    return UpdateModel(UpdateType(d["type"]))


def _percentiles(d: Mapping, path: str) -> ErrorPercentiles:
    conf = _at(f"{path}.confidence", _confidence, d["confidence"])
    values = {a: v for a, v in d.items() if a != "confidence"}
    return _at(path, ErrorPercentiles, MarginVector(values), conf)


def _function(d: Mapping) -> LocalizationFunctionSpec:
    p = "function"
    dof = _at(f"{p}.dof", DofMask, d["dof"])
    interest = _at(f"{p}.interest_space", _space, d["interest_space"])
    motion = _at(f"{p}.motion_space", _space, d["motion_space"])
    safety = _at(f"{p}.safety_margin", MarginVector, d["safety_margin"])
    velocity = _at(f"{p}.max_velocity", VelocityBound, d["max_velocity"])
    for label, keys in (("interest_space", interest.axes), ("motion_space", motion.axes),
                        ("safety_margin", safety), ("max_velocity", velocity)):
        for axis in dof:
            if axis not in keys:
                raise ConfigError(f"missing entry for dof axis {axis!r}",
                                  path=f"{p}.{label}", step="A", axis=axis)
    t = d["transform_L_to_I"]
    spec = _at(p, LocalizationFunctionSpec,
               name=d["name"],
               entity=d["entity"],
               localization_type=LocalizationType(d["localization_type"]),
               dof=dof,
               interest_space=interest,
               motion_space=motion,
               safety_margin=safety,
               reference_basis=StaticBasis(d["reference_basis"]),
               confidence=_at(f"{p}.confidence", _confidence, d["confidence"]),
               max_velocity=velocity,
               realtime_required=d["realtime_required"],
               transform_L_to_I=_at(f"{p}.transform_L_to_I", RigidTransform,
                                    tuple(t["translation"]), t["yaw_offset"]),
               )
    try:
        requirement_margin(interest, motion, safety, dof)
    except ContainmentError as err:
        raise ConfigError(f"not contained in interest_space.{err.axis}",
                          path=f"{p}.motion_space.{err.axis}", step="B", axis=err.axis) from err
    except LocreqError as err:
        raise ConfigError(err.detail, path=f"{p}.safety_margin.{err.axis}",
                          step="B", axis=err.axis) from err
    return spec


def parse_config(data: bytes | str) -> ProjectConfig:
    """Parse and fully validate a project configuration.

    Raises ``ConfigError`` whose message starts with the offending config
    path, e.g. ``function.motion_space.y: not contained in interest_space.y``.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise ConfigError(f"not UTF-8 text: {err}") from err
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as err:
        raise ConfigError(f"JSON syntax error at line {err.lineno} column {err.colno}: {err.msg}") from err

    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        raise ConfigError(f"schema: {err.message}", path=_json_path(err.absolute_path) or "<root>")

    function = _function(raw["function"])

    derive = DeriveSettings()
    if "derive" in raw:
        d = raw["derive"]
        derive = DeriveSettings(
            update=_at("derive.update", _update, d["update"]) if "update" in d else UpdateModel.on_request(),
            latency_s=float(d.get("latency_s", 0.0)),
            yaw_percentile=d.get("yaw_percentile"),
        )

    ils = []
    for i, entry in enumerate(raw.get("ils", [])):
        p = f"ils[{i}]"
        for key in ("accuracy", "repeatability"):
            if key in entry:
                missing = [a for a in function.dof if a not in entry[key]]
                if missing:
                    raise ConfigError(f"missing entry for dof axis {missing[0]!r}",
                                      path=f"{p}.{key}", axis=missing[0])
        ils.append(_at(p, IlsSpec,
                       name=entry["name"],
                       accuracy=_percentiles(entry["accuracy"], f"{p}.accuracy"),
                       repeatability=(_percentiles(entry["repeatability"], f"{p}.repeatability")
                                      if "repeatability" in entry else None),
                       update=_at(f"{p}.update", _update, entry["update"]),
                       latency_s=float(entry["latency_s"])))
        if function.reference_basis is StaticBasis.SAME_SYSTEM_MAP and "repeatability" not in entry:
            raise ConfigError("reference_basis is same_system_map but no repeatability is given",
                              path=f"{p}.repeatability")

    simulation = None
    if "simulation" in raw:
        s = raw["simulation"]
        simulation = SimulationSettings(
            trials=s["trials"],
            seed=s["seed"],
            trajectory=s.get("trajectory", "worst_case"),
            cycles=s.get("cycles", 100),
            update=_at("simulation.update", _update, s["update"]) if "update" in s else None,
            latency_s=s.get("latency_s"),
            budget_scale=float(s.get("budget_scale", 1.0)),
        )

    tabulate = None
    if "tabulate" in raw:
        t = raw["tabulate"]
        if t["stop_s"] < t["start_s"]:
            raise ConfigError("stop_s is below start_s", path="tabulate.stop_s")
        tabulate = TabulateGrid(float(t["start_s"]), float(t["stop_s"]), float(t["step_s"]))

    return ProjectConfig(function=function, derive=derive, ils=tuple(ils),
                         simulation=simulation, tabulate=tabulate)


def load_config(path: str) -> ProjectConfig:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err.strerror}", path=str(path)) from err
    return parse_config(data)


# --- canonical echo -------------------------------------------------------

def _bound_out(v: float) -> float | None:
    return None if math.isinf(v) else v


def _space_out(space: AxisSpace) -> dict:
    return {a: [_bound_out(lo), _bound_out(hi)] for a, (lo, hi) in space.to_dict().items()}


def _percentiles_out(p: ErrorPercentiles) -> dict:
    return {**p.values.to_dict(), "confidence": p.confidence.to_dict()}


def config_to_dict(cfg: ProjectConfig) -> dict:
    """JSON-ready dict that :func:`parse_config` maps back to ``cfg``."""
    f = cfg.function
    out: dict[str, Any] = {
        "function": {
            "name": f.name,
            "entity": f.entity,
            "localization_type": f.localization_type.value,
            "dof": list(f.dof),
            "interest_space": _space_out(f.interest_space),
            "motion_space": _space_out(f.motion_space),
            "safety_margin": f.safety_margin.to_dict(),
            "reference_basis": f.reference_basis.value,
            "confidence": f.confidence.to_dict(),
            "max_velocity": f.max_velocity.to_dict(),
            "realtime_required": f.realtime_required,
            "transform_L_to_I": {
                "translation": list(f.transform_L_to_I.translation),
                "yaw_offset": f.transform_L_to_I.yaw_offset,
            },
        },
        "derive": {
            "update": cfg.derive.update.to_dict(),
            "latency_s": cfg.derive.latency_s,
        },
    }
    if cfg.derive.yaw_percentile is not None:
        out["derive"]["yaw_percentile"] = cfg.derive.yaw_percentile
    if cfg.ils:
        out["ils"] = []
        for ils in cfg.ils:
            entry = {
                "name": ils.name,
                "accuracy": _percentiles_out(ils.accuracy),
                "update": ils.update.to_dict(),
                "latency_s": ils.latency_s,
            }
            if ils.repeatability is not None:
                entry["repeatability"] = _percentiles_out(ils.repeatability)
            out["ils"].append(entry)
    if cfg.simulation is not None:
        s = cfg.simulation
        sim = {"trials": s.trials, "seed": s.seed, "trajectory": s.trajectory,
               "cycles": s.cycles, "budget_scale": s.budget_scale}
        if s.update is not None:
            sim["update"] = s.update.to_dict()
        if s.latency_s is not None:
            sim["latency_s"] = s.latency_s
        out["simulation"] = sim
    if cfg.tabulate is not None:
        t = cfg.tabulate
        out["tabulate"] = {"start_s": t.start_s, "stop_s": t.stop_s, "step_s": t.step_s}
    return out

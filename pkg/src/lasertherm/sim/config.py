"""
TOML run configuration.

Every section and key is listed in ``_SCHEMA``; unknown keys are rejected.
Units follow the rest of the package: cm, s, W, J, degC.

Example::

    [mesh]
    dims = [34, 34, 50]          # element counts (x, y, z); z spans the depth
    extent = [2.0, 2.0, 0.5]     # cm

    [material]
    preset = "agar"

    [laser]
    power = 1.0
    waist = 0.02
    focal_distance = 35.0

    [run]
    duration = 30.0
    initial_temperature = 24.0

Omitted ``[boundary]`` means the bench layout: heat sink on ``bottom`` at the
initial temperature and natural convection on the other five faces.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..assembly import MaterialProperties
from ..boundary import BoundarySpec, ConstantFlux, Convection, HeatSink
from ..mesh import FACE_SET_NAMES
from ..source import CO2_WAVELENGTH_CM, LaserParams
from ..stepper import SolverSettings
from .materials import material_from_water_content, preset


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "mesh": {"dims", "extent", "origin"},
    "material": {"preset", "c_v", "kappa", "mu_a", "h", "T_inf", "water_content", "density"},
    "boundary": set(FACE_SET_NAMES) | {"scale_at_incidence_point"},
    "laser": {
        "power", "waist", "focal_distance", "wavelength", "beam_center",
        "schedule", "gaussian_normalization",
    },
    "solver": {"dt", "method", "tolerance", "max_iterations"},
    "run": {"duration", "initial_temperature", "sink_temperature", "probes"},
    "output": {"directory", "probe_csv", "probe_every", "snapshot_every", "snapshot_field", "snapshot_vtk"},
}
_CONDITION_KEYS = {
    "heat_sink": {"type", "temperature"},
    "flux": {"type", "q"},
    "convection": {"type", "h", "T_inf", "mode"},
}

DEFAULT_PROBES = ((0.0, 0.0), (-0.25, 0.25), (0.25, -0.25))


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "output"
    probe_csv: str = "probes.csv"
    probe_every: int = 1
    snapshot_every: int = 0
    snapshot_field: str = "top"
    snapshot_vtk: bool = False


@dataclass(frozen=True)
class SimulationConfig:
    dims: tuple[int, int, int]
    extent: tuple[float, float, float]
    origin: tuple[float, float, float]
    material: MaterialProperties
    boundary: BoundarySpec
    laser: LaserParams
    solver: SolverSettings
    duration: float
    initial_temperature: float
    probes: tuple[tuple[float, float], ...] = DEFAULT_PROBES
    output: OutputSettings = field(default_factory=OutputSettings)

    @property
    def n_steps(self) -> int:
        ratio = self.duration / self.solver.dt
        nearest = round(ratio)
        return nearest if math.isclose(ratio, nearest, rel_tol=1e-9) else math.ceil(ratio)


def _err(where: str, msg: str) -> ConfigError:
    return ConfigError(f"{where}: {msg}")


def _number(section, key, value, positive=False, nonneg=False):
    where = f"{section}.{key}"
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(where, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise _err(where, "must be finite")
    if positive and not value > 0:
        raise _err(where, f"must be positive, got {value}")
    if nonneg and value < 0:
        raise _err(where, f"must be >= 0, got {value}")
    return value


def _vector(section, key, value, n, kind=float, positive=False):
    where = f"{section}.{key}"
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise _err(where, f"expected a list of {n} values, got {value!r}")
    if kind is int:
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise _err(where, f"expected integers, got {value!r}")
        if positive and min(value) < 1:
            raise _err(where, f"element counts must be >= 1, got {value!r}")
        return tuple(value)
    return tuple(_number(section, f"{key}[{i}]", v, positive=positive) for i, v in enumerate(value))


def _check_keys(section: str, table: Any, allowed: set[str]) -> dict:
    if not isinstance(table, dict):
        raise _err(section, "expected a table")
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise _err(section, f"unknown key(s) {unknown}")
    return table


def _material(table: dict) -> MaterialProperties:
    values = {}
    if "preset" in table:
        try:
            base = preset(str(table["preset"]))
        except ValueError as exc:
            raise _err("material.preset", str(exc)) from None
        values = {k: getattr(base, k) for k in ("c_v", "kappa", "mu_a", "h", "T_inf")}
    if ("water_content" in table) != ("density" in table):
        raise _err("material", "water_content and density must be given together")
    if "water_content" in table:
        w = _number("material", "water_content", table["water_content"])
        rho = _number("material", "density", table["density"], positive=True)
        try:
            values["c_v"], values["kappa"] = material_from_water_content(w, rho)
        except ValueError as exc:
            raise _err("material.water_content", str(exc)) from None
    for key in ("c_v", "kappa", "mu_a", "h"):
        if key in table:
            values[key] = _number("material", key, table[key], positive=True)
    if "T_inf" in table:
        values["T_inf"] = _number("material", "T_inf", table["T_inf"])
    missing = [k for k in ("c_v", "kappa", "mu_a", "h", "T_inf") if k not in values]
    if missing:
        raise _err("material", f"missing {missing} (give a preset or explicit values)")
    return MaterialProperties(**values)


def _condition(name: str, table: Any, material: MaterialProperties, sink_default: float):
    where = f"boundary.{name}"
    if not isinstance(table, dict) or "type" not in table:
        raise _err(where, "expected a table with a 'type' key")
    kind = table["type"]
    if kind not in _CONDITION_KEYS:
        raise _err(where, f"unknown condition type {kind!r}; use {sorted(_CONDITION_KEYS)}")
    _check_keys(where, table, _CONDITION_KEYS[kind])
    if kind == "heat_sink":
        return HeatSink(_number(where, "temperature", table.get("temperature", sink_default)))
    if kind == "flux":
        if "q" not in table:
            raise _err(where, "flux condition needs 'q' (W/cm^2)")
        return ConstantFlux(_number(where, "q", table["q"]))
    mode = table.get("mode", "natural")
    if mode not in ("constant", "natural"):
        raise _err(f"{where}.mode", f"must be 'constant' or 'natural', got {mode!r}")
    return Convection(
        _number(where, "h", table.get("h", material.h), positive=True),
        _number(where, "T_inf", table.get("T_inf", material.T_inf)),
        mode,
    )


def _boundary(table: dict | None, material: MaterialProperties, sink_default: float):
    if table is None:
        conv = Convection(material.h, material.T_inf, "natural")
        conditions = {n: conv for n in FACE_SET_NAMES}
        conditions["bottom"] = HeatSink(sink_default)
        return BoundarySpec(conditions)
    scale = table.get("scale_at_incidence_point", False)
    if not isinstance(scale, bool):
        raise _err("boundary.scale_at_incidence_point", "expected true or false")
    missing = [n for n in FACE_SET_NAMES if n not in table]
    if missing:
        raise _err("boundary", f"every face set needs a condition; missing {missing}")
    conditions = {n: _condition(n, table[n], material, sink_default) for n in FACE_SET_NAMES}
    return BoundarySpec(conditions, scale)


def _laser(table: dict | None, extent, origin) -> LaserParams:
    if table is None:
        raise _err("laser", "section is required (power, waist, focal_distance)")
    for key in ("power", "waist", "focal_distance"):
        if key not in table:
            raise _err(f"laser.{key}", "is required and has no default")
    center_default = (origin[0] + extent[0] / 2, origin[1] + extent[1] / 2)
    center = table.get("beam_center", center_default)
    center = _vector("laser", "beam_center", center, 2)
    schedule = table.get("schedule", [[0.0, 15.0]])
    if not isinstance(schedule, list) or not all(
        isinstance(iv, list) and len(iv) == 2 for iv in schedule
    ):
        raise _err("laser.schedule", "expected a list of [on, off] pairs")
    schedule = tuple(
        _vector("laser", f"schedule[{i}]", iv, 2) for i, iv in enumerate(schedule)
    )
    norm = table.get("gaussian_normalization", "paper")
    try:
        return LaserParams(
            power=_number("laser", "power", table["power"], nonneg=True),
            waist=_number("laser", "waist", table["waist"], positive=True),
            focal_distance=_number("laser", "focal_distance", table["focal_distance"], nonneg=True),
            wavelength=_number("laser", "wavelength", table.get("wavelength", CO2_WAVELENGTH_CM), positive=True),
            beam_center=center,
            schedule=schedule,
            normalization=norm,
        )
    except ValueError as exc:
        raise _err("laser", str(exc)) from None


def _solver(table: dict | None) -> SolverSettings:
    table = table or {}
    kwargs = {}
    if "dt" in table:
        kwargs["dt"] = _number("solver", "dt", table["dt"], positive=True)
    if "tolerance" in table:
        kwargs["tolerance"] = _number("solver", "tolerance", table["tolerance"], positive=True)
    if "method" in table:
        kwargs["method"] = table["method"]
    if "max_iterations" in table:
        mi = table["max_iterations"]
        if isinstance(mi, bool) or not isinstance(mi, int) or mi < 1:
            raise _err("solver.max_iterations", f"expected a positive integer, got {mi!r}")
        kwargs["max_iterations"] = mi
    try:
        return SolverSettings(**kwargs)
    except ValueError as exc:
        raise _err("solver", str(exc)) from None


def _output(table: dict | None) -> OutputSettings:
    table = table or {}
    kwargs = {}
    for key in ("directory", "probe_csv"):
        if key in table:
            if not isinstance(table[key], str) or not table[key]:
                raise _err(f"output.{key}", "expected a non-empty string")
            kwargs[key] = table[key]
    for key in ("probe_every", "snapshot_every"):
        if key in table:
            v = table[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise _err(f"output.{key}", f"expected a non-negative integer, got {v!r}")
            kwargs[key] = v
    if kwargs.get("probe_every", 1) == 0:
        raise _err("output.probe_every", "must be >= 1")
    if "snapshot_field" in table:
        if table["snapshot_field"] not in ("top", "full"):
            raise _err("output.snapshot_field", "must be 'top' or 'full'")
        kwargs["snapshot_field"] = table["snapshot_field"]
    if "snapshot_vtk" in table:
        if not isinstance(table["snapshot_vtk"], bool):
            raise _err("output.snapshot_vtk", "expected true or false")
        kwargs["snapshot_vtk"] = table["snapshot_vtk"]
    return OutputSettings(**kwargs)


def config_from_dict(raw: dict) -> SimulationConfig:
    """Validate a parsed TOML document into a :class:`SimulationConfig`."""
    _check_keys("config", raw, set(_SCHEMA))
    for section, allowed in _SCHEMA.items():
        if section in raw:
            _check_keys(section, raw[section], allowed)

    mesh = raw.get("mesh")
    if mesh is None:
        raise _err("mesh", "section is required")
    for key in ("dims", "extent"):
        if key not in mesh:
            raise _err(f"mesh.{key}", "is required")
    dims = _vector("mesh", "dims", mesh["dims"], 3, kind=int, positive=True)
    extent = _vector("mesh", "extent", mesh["extent"], 3, positive=True)
    origin = _vector(
        "mesh", "origin", mesh.get("origin", [-extent[0] / 2, -extent[1] / 2, 0.0]), 3
    )

    material = _material(raw.get("material") or {})

    run = raw.get("run") or {}
    if "duration" not in run:
        raise _err("run.duration", "is required")
    duration = _number("run", "duration", run["duration"], positive=True)
    u0 = _number("run", "initial_temperature", run.get("initial_temperature", material.T_inf))
    sink = _number("run", "sink_temperature", run.get("sink_temperature", u0))

    probes_raw = run.get("probes", [list(p) for p in DEFAULT_PROBES])
    if not isinstance(probes_raw, list):
        raise _err("run.probes", "expected a list of [x, y] pairs")
    probes = []
    tol = 1e-9
    for i, p in enumerate(probes_raw):
        x, y = _vector("run", f"probes[{i}]", p, 2)
        inside = all(
            origin[a] - tol <= c <= origin[a] + extent[a] + tol for a, c in enumerate((x, y))
        )
        if not inside:
            raise _err(f"run.probes[{i}]", f"probe ({x}, {y}) lies outside the top surface")
        probes.append((x, y))

    boundary = _boundary(raw.get("boundary"), material, sink)
    laser = _laser(raw.get("laser"), extent, origin)
    solver = _solver(raw.get("solver"))
    output = _output(raw.get("output"))

    return SimulationConfig(
        dims=dims, extent=extent, origin=origin, material=material, boundary=boundary,
        laser=laser, solver=solver, duration=duration, initial_temperature=u0,
        probes=tuple(probes), output=output,
    )


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``section.key=value`` strings; values are parsed as TOML."""
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, text = item.split("=", 1)
        keys = path.strip().split(".")
        try:
            value = tomllib.loads(f"v = {text.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = text.strip()
        target = raw
        for k in keys[:-1]:
            target = target.setdefault(k, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override {item!r}: {k!r} is not a table")
        target[keys[-1]] = value
    return raw


def read_raw(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from None


def load_config(path, overrides=None) -> SimulationConfig:
    """Read, override and validate a TOML config file."""
    path = Path(path)
    raw = apply_overrides(read_raw(path), overrides)
    return config_from_dict(raw)

"""Scenario configuration, task execution and result export."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import flux as fx
from . import kernels
from .classical import (
    FieldPoint,
    electric_source_field,
    larmor_power,
    radiation_source_fields,
    radiation_source_potential,
    time_averaged_radiated_power,
    trajectory_from_dict,
)
from .geometry import sphere_grid, unit
from .quadrature import PRESCRIPTIONS, QuadratureSpec
from .spectrum import SpectrumError, emission_lines, real_flux, validate

TASKS = ("rates", "real-flux", "virtual-flux", "angular-map", "classical-field", "identities")

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["spectrum"],
    "additionalProperties": False,
    "properties": {
        "spectrum": {
            "type": "object",
            "required": ["levels", "excited"],
            "additionalProperties": False,
            "properties": {
                "levels": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["label", "energy"],
                        "additionalProperties": False,
                        "properties": {"label": {"type": "string"}, "energy": {"type": "number"}},
                    },
                },
                "dipoles": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["from", "to", "re"],
                        "additionalProperties": False,
                        "properties": {
                            "from": {"type": "string"},
                            "to": {"type": "string"},
                            "re": _vec3,
                            "im": _vec3,
                        },
                    },
                },
                "excited": {"type": "string"},
            },
        },
        "quadrature": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cutoff": {"type": "number", "exclusiveMinimum": 0},
                "regulator": {
                    "type": "object",
                    "required": ["type"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"enum": ["sharp", "exponential"]},
                        "scale": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "n_nodes": {"type": "integer", "minimum": 64},
                "panel_order": {"type": "integer", "minimum": 2},
            },
        },
        "field_points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["direction", "radius", "times"],
                "additionalProperties": False,
                "properties": {
                    "direction": _vec3,
                    "radius": {"type": "number", "exclusiveMinimum": 0},
                    "times": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "sphere_order": {
            "type": "array",
            "items": {"type": "integer", "minimum": 1},
            "minItems": 2,
            "maxItems": 2,
        },
        "tasks": {"type": "array", "items": {"enum": list(TASKS)}},
        "trajectory": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["type", "d0", "omega"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "harmonic"},
                        "d0": _vec3,
                        "omega": {"type": "number"},
                        "phase": {"type": "number"},
                    },
                },
                {
                    "type": "object",
                    "required": ["type", "dt", "samples"],
                    "additionalProperties": False,
                    "properties": {
                        "type": {"const": "tabulated"},
                        "dt": {"type": "number", "exclusiveMinimum": 0},
                        "t0": {"type": "number"},
                        "samples": {"type": "array", "items": _vec3, "minItems": 6},
                    },
                },
            ]
        },
        "virtual": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "prescription": {"enum": list(PRESCRIPTIONS)},
                "window": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


class ConfigError(ValueError):
    """Schema or consistency violation in a scenario config."""


def _path(parts) -> str:
    out = "config"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


@dataclass(frozen=True)
class FieldPointSpec:
    direction: tuple
    radius: float
    times: tuple


@dataclass
class ScenarioConfig:
    spectrum: object
    quadrature: QuadratureSpec
    field_points: list
    sphere_order: tuple
    tasks: list
    trajectory: dict | None = None
    prescription: str = "principal"
    window: float | None = None

    def canonical(self) -> dict:
        """Normalised, semantically complete view used for hashing and provenance."""
        return {
            "spectrum": self.spectrum.to_dict(),
            "quadrature": self.quadrature.to_dict(),
            "field_points": [
                {"direction": [float(x) for x in fp.direction], "radius": float(fp.radius),
                 "times": [float(t) for t in fp.times]}
                for fp in self.field_points
            ],
            "sphere_order": [int(n) for n in self.sphere_order],
            "tasks": sorted(set(self.tasks)),
            "trajectory": _normalise_numbers(self.trajectory),
            "virtual": {"prescription": self.prescription,
                        "window": None if self.window is None else float(self.window)},
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _normalise_numbers(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float)):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _normalise_numbers(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalise_numbers(v) for v in obj]
    return obj


def parse_config(raw: dict, tasks_override=None) -> ScenarioConfig:
    """Validate ``raw`` against the schema and resolve defaults."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(f"{_path(e.absolute_path)}: {e.message}")
    try:
        spectrum = validate(raw["spectrum"])
    except SpectrumError as exc:
        raise ConfigError(f"config.spectrum: {exc}") from None

    if tasks_override is not None:
        tasks = list(tasks_override)
    else:
        if "tasks" not in raw:
            raise ConfigError("config.tasks: required when no task subcommand is given")
        tasks = list(raw["tasks"])
    if not tasks:
        raise ConfigError("config.tasks: at least one task is required")

    try:
        spec = QuadratureSpec.from_dict(raw.get("quadrature", {}), fx.default_spec(spectrum))
        spec.check([t.omega for t in spectrum.from_excited()])
    except ValueError as exc:
        raise ConfigError(f"config.quadrature: {exc}") from None

    fps = []
    for k, fp in enumerate(raw.get("field_points", [])):
        try:
            unit(fp["direction"])
        except ValueError as exc:
            raise ConfigError(f"config.field_points[{k}].direction: {exc}") from None
        fps.append(FieldPointSpec(tuple(fp["direction"]), float(fp["radius"]), tuple(fp["times"])))

    for task in ("virtual-flux", "classical-field"):
        if task in tasks and not fps:
            raise ConfigError(f"config.field_points: required for task {task!r}")
    if "classical-field" in tasks and "trajectory" not in raw:
        raise ConfigError("config.trajectory: required for task 'classical-field'")
    if "virtual-flux" in tasks:
        for k, fp in enumerate(fps):
            for j, t in enumerate(fp.times):
                if t < fp.radius:
                    raise ConfigError(f"config.field_points[{k}].times[{j}]: t={t} < radius (t_r < 0)")
    traj = raw.get("trajectory")
    if traj is not None:
        try:
            trajectory_from_dict(traj)
        except ValueError as exc:
            raise ConfigError(f"config.trajectory: {exc}") from None

    virt = raw.get("virtual", {})
    order = tuple(raw.get("sphere_order", (32, 64)))
    return ScenarioConfig(spectrum, spec, fps, order, tasks, traj,
                          virt.get("prescription", "principal"), virt.get("window"))


def load_config(path, tasks_override=None) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(raw, tasks_override)


# ---------------------------------------------------------------------------
# results


@dataclass
class Table:
    columns: list
    rows: list
    units: dict = field(default_factory=dict)

    def records(self) -> list:
        return [dict(zip(self.columns, r)) for r in self.rows]


@dataclass
class ResultBundle:
    provenance: dict
    tasks: dict
    errors: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "provenance": self.provenance,
            "tasks": {t: {name: tab.records() for name, tab in tabs.items()} for t, tabs in self.tasks.items()},
            "units": {t: {name: tab.units for name, tab in tabs.items()} for t, tabs in self.tasks.items()},
            "errors": self.errors,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ResultBundle":
        tasks = {}
        for t, tabs in obj["tasks"].items():
            tasks[t] = {}
            for name, recs in tabs.items():
                cols = list(recs[0].keys()) if recs else list(obj["units"][t][name].keys())
                tasks[t][name] = Table(cols, [[r[c] for c in cols] for r in recs], obj["units"][t][name])
        return cls(obj["provenance"], tasks, obj.get("errors", {}))

    def __eq__(self, other):
        if not isinstance(other, ResultBundle):
            return NotImplemented
        return self.to_json_obj() == other.to_json_obj()


def _f(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _direction_label(v):
    return "(" + ",".join(format(float(c), ".17g") for c in v) + ")"


def task_rates(cfg: ScenarioConfig) -> dict:
    s = cfg.spectrum
    rows = [[ln.source, ln.target, _f(ln.omega), _f(ln.gamma), _f(ln.power)] for ln in emission_lines(s)]
    return {"transitions": Table(["from", "to", "omega", "gamma", "power"], rows,
                                 {"omega": "frequency", "gamma": "rate (1/time)", "power": "energy/time"})}


def task_real_flux(cfg: ScenarioConfig) -> dict:
    s, spec = cfg.spectrum, cfg.quadrature
    grid = sphere_grid(*cfg.sphere_order)
    ana = fx.total_real_flux(s, grid, spec, "analytic")
    num = fx.total_real_flux(s, grid, spec, "numerical")
    ref = real_flux(s).total
    rows = [[s.excited, r.target, _f(r.omega), _f(r.first_order), _f(r.second_order), _f(r.power),
             _f(n.second_order), _f(n.second_order_error)]
            for r, n in zip(ana.transitions, num.transitions)]
    units = {c: "energy/time" for c in ("first_order", "second_order", "power", "second_order_numerical",
                                        "second_order_numerical_error")}
    units["omega"] = "frequency"
    rel = abs(ana.total - ref) / ref if ref else abs(ana.total)
    summary = [[_f(ana.total), _f(num.total), _f(num.error), _f(ref), _f(rel)]]
    return {
        "transitions": Table(["from", "to", "omega", "first_order", "second_order", "power",
                              "second_order_numerical", "second_order_numerical_error"], rows, units),
        "summary": Table(["P_real", "P_real_numerical", "P_real_numerical_error", "P_real_spectrum",
                          "relative_difference"], summary,
                         {"P_real": "energy/time", "P_real_numerical": "energy/time",
                          "P_real_numerical_error": "energy/time", "P_real_spectrum": "energy/time",
                          "relative_difference": "dimensionless"}),
    }


def task_virtual_flux(cfg: ScenarioConfig) -> dict:
    s, spec = cfg.spectrum, cfg.quadrature
    grid = sphere_grid(*cfg.sphere_order)
    rows, summary = [], []
    p_real = fx.total_real_flux(s, grid, spec).total
    asym = fx.virtual_flux_asymptote(s, grid, spec, cfg.prescription)
    for fp in cfg.field_points:
        series = fx.virtual_flux_series(s, fp.times, grid, spec, fp.radius, cfg.prescription)
        for t, tr, v in zip(series.t, series.t_r, series.values):
            rows.append([_f(t), _f(tr), _f(v), _f(spec.cutoff), series.regulator])
        window = cfg.window if cfg.window is not None else (float(series.t_r.max()) if len(fp.times) else 0.0)
        if window > 0:
            avg = fx.virtual_flux_average(s, window, grid, spec)
            avg += asym - fx.virtual_flux_asymptote(s, grid, spec)
        else:
            avg = math.nan
        summary.append([_f(fp.radius), _f(window), _f(avg), _f(p_real), _f(p_real + avg) if window > 0 else None,
                        _f(asym), cfg.prescription, _f(spec.cutoff), spec.regulator.label()])
    return {
        "series": Table(["t", "t_r", "P_virtual", "cutoff", "regulator"], rows,
                        {"t": "time", "t_r": "time", "P_virtual": "energy/time", "cutoff": "frequency",
                         "regulator": "label"}),
        "summary": Table(["radius", "window", "P_virtual_average", "P_real", "P_total_average",
                          "P_virtual_asymptote", "prescription", "cutoff", "regulator"], summary,
                         {"radius": "length", "window": "time", "P_virtual_average": "energy/time",
                          "P_real": "energy/time", "P_total_average": "energy/time",
                          "P_virtual_asymptote": "energy/time", "prescription": "label",
                          "cutoff": "frequency", "regulator": "label"}),
    }


def task_angular_map(cfg: ScenarioConfig) -> dict:
    grid = sphere_grid(*cfg.sphere_order)
    theta, phi, w, dens = fx.angular_map(cfg.spectrum, grid)
    rows = [[_f(a), _f(b), _f(c), _f(d)] for a, b, c, d in zip(theta, phi, w, dens)]
    total = float(np.sum(w * dens))
    return {
        "map": Table(["theta", "phi", "weight", "x2_density"], rows,
                     {"theta": "rad", "phi": "rad", "weight": "sr", "x2_density": "energy/time/sr"}),
        "summary": Table(["sphere_sum", "P_real_spectrum"], [[_f(total), _f(real_flux(cfg.spectrum).total)]],
                         {"sphere_sum": "energy/time", "P_real_spectrum": "energy/time"}),
    }


def task_classical_field(cfg: ScenarioConfig) -> dict:
    traj = trajectory_from_dict(cfg.trajectory)
    grid = sphere_grid(*cfg.sphere_order)
    cols = ["direction", "radius", "t", "t_r"]
    for name in ("near", "intermediate", "far", "E_rad", "B_rad", "A_rad"):
        cols += [f"{name}_{c}" for c in "xyz"]
    rows = []
    for fp in cfg.field_points:
        for t in fp.times:
            p = FieldPoint(np.asarray(fp.direction, float), fp.radius, float(t))
            z = electric_source_field(traj, p)
            e, b = radiation_source_fields(traj, p)
            a = radiation_source_potential(traj, p)
            vals = [*z.near, *z.intermediate, *z.far, *e, *b, *a]
            rows.append([_direction_label(p.xhat), _f(fp.radius), _f(t), _f(p.t_r)] + [_f(v) for v in vals])
    units = {c: "field (natural units)" for c in cols[4:]}
    units.update({"direction": "unit vector", "radius": "length", "t": "time", "t_r": "time"})
    power_rows = []
    for r in sorted({fp.radius for fp in cfg.field_points}):
        if traj.kind == "harmonic":
            avg = time_averaged_radiated_power(traj, r, grid=grid)
            lar = larmor_power(float(np.linalg.norm(traj.d0)), traj.omega)
        else:
            avg, lar = math.nan, math.nan
        power_rows.append([_f(r), _f(avg), _f(lar)])
    return {
        "fields": Table(cols, rows, units),
        "power": Table(["radius", "P_classical_average", "P_larmor"], power_rows,
                       {"radius": "length", "P_classical_average": "energy/time", "P_larmor": "energy/time"}),
    }


def task_identities(cfg: ScenarioConfig) -> dict:
    from .checks import run_identity_checks

    rows = [[c.name, _f(c.value), _f(c.expected), _f(c.error), _f(c.tolerance), bool(c.passed)]
            for c in run_identity_checks(cfg.spectrum, cfg.quadrature, cfg.sphere_order)]
    return {"checks": Table(["name", "value", "expected", "error", "tolerance", "passed"], rows,
                            {"value": "mixed", "expected": "mixed", "error": "mixed", "tolerance": "mixed",
                             "passed": "boolean"})}


TASK_FUNCS = {
    "rates": task_rates,
    "real-flux": task_real_flux,
    "virtual-flux": task_virtual_flux,
    "angular-map": task_angular_map,
    "classical-field": task_classical_field,
    "identities": task_identities,
}


def provenance(cfg: ScenarioConfig) -> dict:
    q = cfg.quadrature
    return {
        "code": "dipole-flux",
        "code_version": __version__,
        "backend": kernels.BACKEND,
        "config_hash": cfg.config_hash(),
        "units": "natural (hbar = c = eps0 = mu0 = 1)",
        "quadrature": q.to_dict(),
        "sphere_order": [int(n) for n in cfg.sphere_order],
        "prescription": cfg.prescription,
    }


def run_scenario(cfg: ScenarioConfig) -> ResultBundle:
    """Run every requested task; a failing task is recorded and the rest continue."""
    tasks, errors = {}, {}
    order = [t for t in TASKS if t in set(cfg.tasks)]
    results = fx.parallel_map(lambda name: _run_one(name, cfg), order)
    for name, (tables, err) in zip(order, results):
        if err is None:
            tasks[name] = tables
        else:
            errors[name] = err
    return ResultBundle(provenance(cfg), tasks, errors)


def _run_one(name, cfg):
    try:
        return TASK_FUNCS[name](cfg), None
    except (ArithmeticError, ValueError, FloatingPointError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _cell(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def table_csv(task: str, name: str, table: Table, prov: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# {prov['code']} {prov['code_version']} backend={prov['backend']}\n")
    buf.write(f"# config_hash: {prov['config_hash']}\n")
    buf.write(f"# task: {task} table: {name}\n")
    buf.write(f"# units: {prov['units']}; " + ", ".join(f"{c}={u}" for c, u in table.units.items()) + "\n")
    q = prov["quadrature"]
    reg = q["regulator"]
    buf.write(f"# quadrature: cutoff={_cell(q['cutoff'])} regulator={reg['type']}"
              + (f"({_cell(reg['scale'])})" if "scale" in reg else "")
              + f" epsilon={_cell(q['epsilon'])} n_nodes={q['n_nodes']} panel_order={q['panel_order']}"
              + f" sphere_order={prov['sphere_order']} prescription={prov['prescription']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def emit(bundle: ResultBundle, fmt: str, path) -> list:
    """Write the bundle under directory ``path``; returns the files written."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        p = out / "results.json"
        with open(p, "w") as fh:
            json.dump(bundle.to_json_obj(), fh, indent=1, allow_nan=False)
            fh.write("\n")
        written.append(p)
    elif fmt == "csv":
        for task, tabs in bundle.tasks.items():
            for i, (name, tab) in enumerate(tabs.items()):
                p = out / (f"{task}.csv" if i == 0 else f"{task}_{name}.csv")
                with open(p, "w", newline="") as fh:
                    fh.write(table_csv(task, name, tab, bundle.provenance))
                written.append(p)
        if bundle.errors:
            p = out / "errors.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["task", "error"])
                for k, v in bundle.errors.items():
                    w.writerow([k, v])
            written.append(p)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return written


def load_bundle(path) -> ResultBundle:
    with open(path) as fh:
        return ResultBundle.from_json_obj(json.load(fh))


def env_threads() -> int:
    return fx.thread_count() if os.environ.get("DIPOLE_FLUX_THREADS") else 1

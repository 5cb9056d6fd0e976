"""Problem files, layout/report serialisation and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import platform
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .geometry import Boundary
from .layoutopt import OptimizationConfig
from .turbine import InvalidInput, TurbineSpec, load_turbine, reference_turbine
from .wake import WakeModelConfig
from .windrose import WindRose, read_rose

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_CURVE = {"type": "array", "items": _POINT, "minItems": 2}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["boundary", "rose"],
    "additionalProperties": False,
    "properties": {
        "boundary": {"type": "array", "items": _POINT, "minItems": 3},
        "turbine": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "required": ["rotor_diameter_m", "hub_height_m", "rated_power_mw", "cut_in_ms",
                                 "cut_out_ms", "power_curve", "thrust_curve"],
                    "properties": {
                        "name": {"type": "string"},
                        "rotor_diameter_m": {"type": "number", "exclusiveMinimum": 0},
                        "hub_height_m": {"type": "number", "exclusiveMinimum": 0},
                        "rated_power_mw": {"type": "number", "exclusiveMinimum": 0},
                        "cut_in_ms": {"type": "number", "minimum": 0},
                        "cut_out_ms": {"type": "number", "exclusiveMinimum": 0},
                        "power_curve": _CURVE,
                        "thrust_curve": _CURVE,
                    },
                },
            ]
        },
        "rose": {"type": "string"},
        "layout": {"oneOf": [{"type": "string"}, {"type": "array", "items": _POINT}]},
        "n_turbines": {"type": "integer", "minimum": 1},
        "wake": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "model": {"enum": ["jensen", "bastankhah", "Jensen", "Bastankhah"]},
                "k": {"type": "number", "exclusiveMinimum": 0},
                "k_star": {"type": "number", "exclusiveMinimum": 0},
                "deficit_basis": {"enum": ["local", "freestream"]},
            },
        },
        "optimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_starts": {"type": "integer", "minimum": 1},
                "n_sequences": {"type": "integer", "minimum": 1},
                "n_iterations": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "min_spacing": {"type": "number", "exclusiveMinimum": 0},
                "initial_step": {"type": "number", "exclusiveMinimum": 0},
                "max_step": {"type": "number", "exclusiveMinimum": 0},
                "penalty_weight": {"type": "number", "exclusiveMinimum": 0},
                "penalty_growth": {"type": "number", "exclusiveMinimum": 0},
                "penalty_weight_schedule": {"type": "array", "items": {"type": "number"}},
                "fd_step": {"type": "number", "exclusiveMinimum": 0},
                "max_halvings": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class ProblemError(InvalidInput):
    pass


def _field_path(err):
    path = "problem"
    for p in err.absolute_path:
        path += f"[{p}]" if isinstance(p, int) else f".{p}"
    return path


class ProblemFile:
    """A parsed, validated problem file; relative paths resolve against its directory."""

    def __init__(self, data, base_dir="."):
        validator = jsonschema.Draft202012Validator(PROBLEM_SCHEMA)
        errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        if errors:
            e = errors[0]
            raise ProblemError(f"{_field_path(e)}: {e.message}")
        self.data = data
        self.base_dir = Path(base_dir)
        self.inputs = []

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ProblemError(f"{path}: invalid JSON ({exc})") from None
        prob = cls(data, path.parent)
        prob.inputs.append(path)
        return prob

    def _resolve(self, rel):
        p = Path(rel)
        p = p if p.is_absolute() else self.base_dir / p
        if not p.exists():
            raise ProblemError(f"referenced file not found: {p}")
        self.inputs.append(p)
        return p

    def boundary(self):
        try:
            return Boundary(tuple(tuple(v) for v in self.data["boundary"]))
        except InvalidInput as exc:
            raise ProblemError(f"problem.boundary: {exc}") from None

    def turbine(self) -> TurbineSpec:
        t = self.data.get("turbine")
        try:
            if t is None:
                return reference_turbine()
            if isinstance(t, str):
                return load_turbine(self._resolve(t))
            return TurbineSpec.from_dict(t)
        except InvalidInput as exc:
            raise ProblemError(f"problem.turbine: {exc}") from None

    def rose(self) -> WindRose:
        return read_rose(self._resolve(self.data["rose"]))

    def layout(self):
        lay = self.data.get("layout")
        if lay is None:
            return None
        if isinstance(lay, str):
            return read_layout(self._resolve(lay))
        return np.asarray(lay, dtype=float).reshape(-1, 2)

    def wake(self, model=None) -> WakeModelConfig:
        w = dict(self.data.get("wake", {}))
        kw = {}
        if model or "model" in w:
            kw["model"] = (model or w["model"]).lower()
        if "k" in w:
            kw["k_jensen"] = w["k"]
        if "k_star" in w:
            kw["k_star"] = w["k_star"]
        if "deficit_basis" in w:
            kw["deficit_basis"] = w["deficit_basis"]
        return WakeModelConfig(**kw)

    def optimizer(self, **overrides) -> OptimizationConfig:
        o = dict(self.data.get("optimizer", {}))
        if "penalty_weight_schedule" in o:
            o["penalty_weight_schedule"] = tuple(o["penalty_weight_schedule"])
        o.update({k: v for k, v in overrides.items() if v is not None})
        return OptimizationConfig(**o)


def write_layout(pos, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m"])
        for x, y in np.asarray(pos, dtype=float):
            w.writerow([repr(float(x)), repr(float(y))])


def read_layout(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["x_m", "y_m"]:
            raise InvalidInput(f"{path}: expected header x_m,y_m")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                raise InvalidInput(f"{path}: line {lineno}: malformed row {row!r}") from None
    return np.array(rows, dtype=float).reshape(-1, 2)


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2))


def write_history(starts, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["start", "sequence", "iteration", "penalty_weight", "objective", "accepted"])
        for s in starts:
            for seq, it, weight, f, acc in s.history:
                w.writerow([s.index, seq, it, repr(weight), repr(f), int(acc)])


def write_per_direction(rose, report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["center_deg", "frequency", "mean_speed_ms", "farm_power_mw"])
        for b, p in zip(rose.bins, report.per_direction_power):
            w.writerow([repr(b.center_direction), repr(b.frequency), repr(b.mean_speed), repr(p)])


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, command, inputs, config, wall_time, outputs, argv=None):
    seen = []
    for p in inputs:
        p = Path(p).resolve()
        if p not in seen:
            seen.append(p)
    manifest = {
        "command": command,
        "argv": list(argv or []),
        "inputs": [{"path": str(p), "sha256": sha256(p)} for p in seen],
        "config": config,
        "tool_version": __version__,
        "python": platform.python_version(),
        "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "wall_time_s": wall_time,
        "outputs": [str(Path(o).name) for o in outputs],
    }
    path = Path(out_dir) / "manifest.json"
    write_json(manifest, path)
    return path


def verify_manifest(path):
    """True when every recorded input still hashes to its recorded digest."""
    m = json.loads(Path(path).read_text())
    return all(Path(i["path"]).exists() and sha256(i["path"]) == i["sha256"] for i in m["inputs"])

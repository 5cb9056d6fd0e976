"""Farm power, annual energy production and flow-field sampling."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .turbine import InvalidInput, TurbineSpec, power_kernel
from .wake import (TIE_TOL, WakeModelConfig, _deficit, as_positions, check_distinct, sweep_kernel,
                   wind_frame)
from .windrose import WindRose

HOURS_PER_YEAR = 8760.0


@dataclass(frozen=True)
class EvaluationReport:
    aep: float  # GWh/yr
    gross_aep: float  # GWh/yr
    wake_loss: float
    per_direction_power: tuple  # MW, one per rose bin
    n_turbines: int
    installed_capacity: float  # MW

    def to_dict(self):
        d = asdict(self)
        d["per_direction_power"] = list(self.per_direction_power)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(aep=float(d["aep"]), gross_aep=float(d["gross_aep"]), wake_loss=float(d["wake_loss"]),
                   per_direction_power=tuple(float(p) for p in d["per_direction_power"]),
                   n_turbines=int(d["n_turbines"]), installed_capacity=float(d["installed_capacity"]))


@dataclass(frozen=True)
class FlowFieldGrid:
    origin: tuple
    cell_size: float
    nx: int
    ny: int
    speeds: np.ndarray  # shape (nx, ny)

    def cell_centers(self):
        xs = self.origin[0] + self.cell_size * np.arange(self.nx)
        ys = self.origin[1] + self.cell_size * np.arange(self.ny)
        return xs, ys


@njit(cache=True, nogil=True)
def farm_power_kernel(x, y, direction, speed, curves, d_rotor, model, k, local):
    u, _ = sweep_kernel(x, y, direction, speed, curves, d_rotor, model, k, local)
    total = 0.0
    for i in range(u.shape[0]):
        total += power_kernel(curves, u[i])
    return total


@njit(cache=True, nogil=True)
def aep_kernel(x, y, directions, frequencies, speeds, curves, d_rotor, model, k, local):
    """AEP in GWh; bins are summed in index order so the result is bit-stable."""
    per_dir = np.zeros(directions.shape[0])
    total = 0.0
    for b in range(directions.shape[0]):
        if frequencies[b] == 0.0:
            continue
        p = farm_power_kernel(x, y, directions[b], speeds[b], curves, d_rotor, model, k, local)
        per_dir[b] = p
        total += frequencies[b] * p
    return total * HOURS_PER_YEAR / 1000.0, per_dir


def rose_arrays(rose: WindRose):
    return (np.ascontiguousarray(rose.directions), np.ascontiguousarray(rose.frequencies),
            np.ascontiguousarray(rose.speeds))


def farm_power(layout, spec: TurbineSpec, direction, speed, cfg=WakeModelConfig()):
    """Total farm output in MW for one inflow state."""
    if speed < 0:
        raise InvalidInput("speed must be non-negative")
    pos = as_positions(layout)
    check_distinct(pos)
    return float(farm_power_kernel(pos[:, 0].copy(), pos[:, 1].copy(), float(direction), float(speed),
                                   spec.curves, spec.rotor_diameter, cfg.code, cfg.expansion, cfg.local))


def gross_aep(n_turbines, spec: TurbineSpec, rose: WindRose):
    total = 0.0
    for b in rose.bins:
        total += b.frequency * n_turbines * float(power_kernel(spec.curves, b.mean_speed))
    return total * HOURS_PER_YEAR / 1000.0


def compute_aep(layout, spec: TurbineSpec, rose: WindRose, cfg=WakeModelConfig()) -> EvaluationReport:
    pos = as_positions(layout)
    check_distinct(pos)
    d, f, s = rose_arrays(rose)
    aep, per_dir = aep_kernel(pos[:, 0].copy(), pos[:, 1].copy(), d, f, s, spec.curves,
                              spec.rotor_diameter, cfg.code, cfg.expansion, cfg.local)
    gross = gross_aep(len(pos), spec, rose)
    aep = min(float(aep), gross)
    loss = 1.0 - aep / gross if gross > 0 else 0.0
    return EvaluationReport(
        aep=aep,
        gross_aep=gross,
        wake_loss=min(max(loss, 0.0), 1.0),
        per_direction_power=tuple(float(p) for p in per_dir),
        n_turbines=len(pos),
        installed_capacity=len(pos) * spec.rated_power,
    )


def capacity_plan(area_km2, density, unit_rating):
    """Installed capacity (MW) for an area at a given density, and whole turbines it buys."""
    if area_km2 <= 0 or density <= 0 or unit_rating <= 0:
        raise InvalidInput("area, density and unit rating must all be positive")
    capacity = area_km2 * density
    # tolerance keeps exact multiples such as 3.5 / 3.5 from flooring down
    n = int(math.floor(capacity / unit_rating + 1e-9))
    return {"capacity": capacity, "n_turbines": n}


@njit(cache=True, nogil=True)
def _field_kernel(px, py, tx, ty, direction, speed, cts, upstream, d_rotor, model, k, local):
    n_pts = px.shape[0]
    out = np.empty(n_pts)
    txd, tyd = wind_frame(tx, ty, direction)
    pxd, pyd = wind_frame(px, py, direction)
    for i in range(n_pts):
        total = 0.0
        for j in range(tx.shape[0]):
            dx = pxd[i] - txd[j]
            if dx <= TIE_TOL:
                continue
            d = _deficit(model, dx, pyd[i] - tyd[j], cts[j], d_rotor, k)
            if local and speed > 0.0:
                d *= upstream[j] / speed
            total += d * d
        out[i] = speed * (1.0 - min(math.sqrt(total), 1.0))
    return out


def flow_field(layout, spec: TurbineSpec, direction, speed, cfg=WakeModelConfig(),
               origin=(0.0, 0.0), cell_size=100.0, nx=100, ny=100):
    """Hub-height speed on a regular grid, using each turbine's frozen inflow Ct."""
    if nx < 1 or ny < 1 or cell_size <= 0:
        raise InvalidInput("flow-field grid must have positive size")
    pos = as_positions(layout)
    xs = origin[0] + cell_size * np.arange(nx)
    ys = origin[1] + cell_size * np.arange(ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    if len(pos) == 0:
        return FlowFieldGrid(tuple(origin), cell_size, nx, ny, np.full((nx, ny), float(speed)))
    check_distinct(pos)
    tx, ty = pos[:, 0].copy(), pos[:, 1].copy()
    upstream, cts = sweep_kernel(tx, ty, float(direction), float(speed), spec.curves,
                                 spec.rotor_diameter, cfg.code, cfg.expansion, cfg.local)
    vals = _field_kernel(gx.ravel().copy(), gy.ravel().copy(), tx, ty, float(direction), float(speed),
                         cts, upstream, spec.rotor_diameter, cfg.code, cfg.expansion, cfg.local)
    return FlowFieldGrid(tuple(float(o) for o in origin), float(cell_size), nx, ny, vals.reshape(nx, ny))


def grid_for_boundary(vertices, cell_size=100.0, margin=1000.0):
    v = np.asarray(vertices, dtype=float)
    lo = v.min(axis=0) - margin
    hi = v.max(axis=0) + margin
    nx = int(math.ceil((hi[0] - lo[0]) / cell_size)) + 1
    ny = int(math.ceil((hi[1] - lo[1]) / cell_size)) + 1
    return {"origin": (float(lo[0]), float(lo[1])), "cell_size": float(cell_size), "nx": nx, "ny": ny}

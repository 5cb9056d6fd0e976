"""Turbine performance data.

Power and thrust curves are stored as tabulated knots and evaluated with a
monotone (PCHIP) cubic after a weak-wind blend that removes the jump at
cut-in. The evaluated curves are exposed both as plain Python functions and
as packed piecewise-polynomial arrays for the compiled wake kernels.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from numba import njit
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

CT_MAX = 0.999
RHO_AIR = 1.225


class InvalidInput(ValueError):
    """Raised when a numeric input violates an operation's precondition."""


@dataclass(frozen=True)
class CurvePoint:
    speed: float
    value: float


def shear_extrapolate(speed, z_ref, z_target, alpha=0.15):
    """Power-law shear: ``speed * (z_target / z_ref) ** alpha``."""
    if z_ref <= 0 or z_target <= 0:
        raise InvalidInput(f"heights must be positive, got z_ref={z_ref}, z_target={z_target}")
    return speed * (z_target / z_ref) ** alpha


def _as_arrays(curve):
    pts = [p if isinstance(p, CurvePoint) else CurvePoint(*p) for p in curve]
    v = np.array([p.speed for p in pts], dtype=float)
    y = np.array([p.value for p in pts], dtype=float)
    if len(v) < 2:
        raise InvalidInput("a curve needs at least two points")
    if np.any(np.diff(v) <= 0):
        raise InvalidInput("curve speeds must be strictly increasing")
    return v, y


def smooth_curve(curve, cut_in, blend_width=1.0, n_sub=8):
    """Replace the cut-in jump of a curve with a C1 cubic ramp.

    The result is zero from ``cut_in - blend_width`` up to ``cut_in``, then a
    cubic Hermite segment with zero slope at ``cut_in`` that meets the raw
    interpolant (value and slope) at ``cut_in + blend_width``. Raw knots at or
    above that point are kept unchanged.
    """
    if blend_width <= 0:
        raise InvalidInput("blend_width must be positive")
    v, y = _as_arrays(curve)
    raw = PchipInterpolator(v, y, extrapolate=True)
    hi = cut_in + blend_width
    p1 = float(raw(hi))
    m1 = float(raw.derivative()(hi))
    ramp = CubicHermiteSpline([cut_in, hi], [0.0, p1], [0.0, m1])
    lo_val = min(0.0, p1)
    hi_val = max(0.0, p1)

    out = [CurvePoint(cut_in - blend_width, 0.0), CurvePoint(cut_in, 0.0)]
    for s in np.linspace(cut_in, hi, n_sub + 1)[1:-1]:
        out.append(CurvePoint(float(s), float(np.clip(ramp(s), lo_val, hi_val))))
    out.append(CurvePoint(hi, p1))
    out.extend(CurvePoint(float(a), float(b)) for a, b in zip(v, y) if a > hi)
    return out


@njit(cache=True, nogil=True)
def ppoly_eval(xk, coef, v):
    """Evaluate a packed cubic piecewise polynomial (scipy ``PPoly`` layout)."""
    i = np.searchsorted(xk, v, side="right") - 1
    if i < 0:
        i = 0
    elif i > coef.shape[1] - 1:
        i = coef.shape[1] - 1
    t = v - xk[i]
    return ((coef[0, i] * t + coef[1, i]) * t + coef[2, i]) * t + coef[3, i]


@njit(cache=True, nogil=True)
def power_kernel(curves, v):
    pxk, pc, _, _, cut_in, cut_out, rated = curves
    if v < cut_in or v > cut_out:
        return 0.0
    p = ppoly_eval(pxk, pc, v)
    return min(max(p, 0.0), rated)


@njit(cache=True, nogil=True)
def thrust_kernel(curves, v):
    _, _, cxk, cc, cut_in, cut_out, _ = curves
    if v < cut_in or v > cut_out:
        return 0.0
    c = ppoly_eval(cxk, cc, v)
    return min(max(c, 0.0), 0.999)


def _packed(curve):
    v, y = _as_arrays(curve)
    pp = PchipInterpolator(v, y, extrapolate=True)
    return np.ascontiguousarray(pp.x, dtype=float), np.ascontiguousarray(pp.c, dtype=float)


@dataclass(frozen=True)
class TurbineSpec:
    """Rotor geometry plus tabulated power (MW) and thrust-coefficient curves."""

    rotor_diameter: float
    hub_height: float
    rated_power: float
    cut_in: float
    cut_out: float
    power_curve: tuple
    thrust_curve: tuple
    name: str = "turbine"
    blend_width: float = field(default=1.0, compare=False)

    def __post_init__(self):
        pc = tuple(p if isinstance(p, CurvePoint) else CurvePoint(float(p[0]), float(p[1]))
                   for p in self.power_curve)
        tc = tuple(p if isinstance(p, CurvePoint) else CurvePoint(float(p[0]), float(p[1]))
                   for p in self.thrust_curve)
        object.__setattr__(self, "power_curve", pc)
        object.__setattr__(self, "thrust_curve", tc)
        self.validate()

    def validate(self):
        if self.rotor_diameter <= 0 or self.hub_height <= 0:
            raise InvalidInput("rotor_diameter and hub_height must be positive")
        if not self.cut_in < self.cut_out:
            raise InvalidInput("cut_in must be below cut_out")
        for label, curve in (("power_curve", self.power_curve), ("thrust_curve", self.thrust_curve)):
            v, y = _as_arrays(curve)
            if v[0] > self.cut_in or v[-1] < self.cut_out:
                raise InvalidInput(f"{label} must cover [cut_in, cut_out]")
            if np.any(y < 0):
                raise InvalidInput(f"{label} has negative values")
        pv, py = _as_arrays(self.power_curve)
        if np.any(py > self.rated_power + 1e-9):
            raise InvalidInput("power_curve exceeds rated_power")
        if not np.any(np.isclose(py[pv <= self.cut_out], self.rated_power)):
            raise InvalidInput("power_curve never reaches rated_power")

    @property
    def radius(self):
        return 0.5 * self.rotor_diameter

    @cached_property
    def smoothed_power_curve(self):
        return smooth_curve(self.power_curve, self.cut_in, self.blend_width)

    @cached_property
    def smoothed_thrust_curve(self):
        return smooth_curve(self.thrust_curve, self.cut_in, self.blend_width)

    @cached_property
    def curves(self):
        """Packed curve data consumed by the compiled kernels."""
        pxk, pc = _packed(self.smoothed_power_curve)
        cxk, cc = _packed(self.smoothed_thrust_curve)
        return (pxk, pc, cxk, cc, float(self.cut_in), float(self.cut_out), float(self.rated_power))

    def to_dict(self):
        return {
            "name": self.name,
            "rotor_diameter_m": self.rotor_diameter,
            "hub_height_m": self.hub_height,
            "rated_power_mw": self.rated_power,
            "cut_in_ms": self.cut_in,
            "cut_out_ms": self.cut_out,
            "power_curve": [[p.speed, p.value] for p in self.power_curve],
            "thrust_curve": [[p.speed, p.value] for p in self.thrust_curve],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                name=d.get("name", "turbine"),
                rotor_diameter=float(d["rotor_diameter_m"]),
                hub_height=float(d["hub_height_m"]),
                rated_power=float(d["rated_power_mw"]),
                cut_in=float(d["cut_in_ms"]),
                cut_out=float(d["cut_out_ms"]),
                power_curve=tuple(tuple(p) for p in d["power_curve"]),
                thrust_curve=tuple(tuple(p) for p in d["thrust_curve"]),
            )
        except KeyError as exc:
            raise InvalidInput(f"turbine spec is missing field {exc.args[0]!r}") from None


def power_at(spec: TurbineSpec, speed: float) -> float:
    """Electrical power in MW at hub-height ``speed``."""
    if speed < 0:
        raise InvalidInput("speed must be non-negative")
    return float(power_kernel(spec.curves, float(speed)))


def thrust_coefficient_at(spec: TurbineSpec, speed: float) -> float:
    if speed < 0:
        raise InvalidInput("speed must be non-negative")
    return float(thrust_kernel(spec.curves, float(speed)))


def reference_turbine(rated_power=15.0, rotor_diameter=240.0, hub_height=150.0,
                      cut_in=3.0, cut_out=25.0, cp=0.47, ct_below_rated=0.8, step=0.5):
    """Parametric stand-in for a 15 MW offshore reference machine.

    Power follows ``min(P_rated, 0.5 rho A Cp v^3)``; Ct is constant below
    rated speed and decays as ``(v_rated / v)^3`` above it.
    """
    area = math.pi * rotor_diameter**2 / 4.0
    k = 0.5 * RHO_AIR * area * cp / 1e6
    v_rated = (rated_power / k) ** (1.0 / 3.0)
    speeds = sorted(set(np.round(np.arange(cut_in, cut_out + 1e-9, step), 9)) | {round(v_rated, 9)})
    power = [(v, min(rated_power, k * v**3)) for v in speeds]
    thrust = [(v, ct_below_rated if v <= v_rated else ct_below_rated * (v_rated / v) ** 3)
              for v in speeds]
    return TurbineSpec(
        name=f"reference-{rated_power:g}MW",
        rotor_diameter=rotor_diameter,
        hub_height=hub_height,
        rated_power=rated_power,
        cut_in=cut_in,
        cut_out=cut_out,
        power_curve=tuple(power),
        thrust_curve=tuple(thrust),
    )


def load_turbine(path) -> TurbineSpec:
    with open(path) as fh:
        return TurbineSpec.from_dict(json.load(fh))


def save_turbine(spec: TurbineSpec, path):
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2))

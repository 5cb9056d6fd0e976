"""Engineering wake models and the per-direction upstream sweep."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .turbine import InvalidInput, TurbineSpec, thrust_kernel

JENSEN = 0
BASTANKHAH = 1
MODEL_CODES = {"jensen": JENSEN, "bastankhah": BASTANKHAH}

TIE_TOL = 1e-9
NEAR_WAKE_CLAMP = 0.999


class InvalidLayout(InvalidInput):
    pass


@dataclass(frozen=True)
class WakeModelConfig:
    model: str = "bastankhah"
    k_jensen: float = 0.05
    k_star: float = 0.025
    superposition: str = "rss"
    deficit_basis: str = "local"

    def __post_init__(self):
        object.__setattr__(self, "model", self.model.lower())
        if self.model not in MODEL_CODES:
            raise InvalidInput(f"unknown wake model {self.model!r}")
        if self.k_jensen <= 0 or self.k_star <= 0:
            raise InvalidInput("wake expansion constants must be positive")
        if self.superposition.lower() != "rss":
            raise InvalidInput("only root-sum-square superposition is supported")
        if self.deficit_basis not in ("local", "freestream"):
            raise InvalidInput("deficit_basis must be 'local' or 'freestream'")

    @property
    def code(self):
        return MODEL_CODES[self.model]

    @property
    def expansion(self):
        return self.k_jensen if self.code == JENSEN else self.k_star

    @property
    def local(self):
        return self.deficit_basis == "local"


@njit(cache=True, nogil=True)
def jensen_deficit(dx, dr, ct, d_rotor, k):
    """Top-hat deficit fraction ``(1 - sqrt(1 - Ct)) / (1 + 2 k dx / D)^2``."""
    if dx <= 0.0 or ct <= 0.0:
        return 0.0
    if abs(dr) > 0.5 * d_rotor + k * dx:
        return 0.0
    ct = min(ct, NEAR_WAKE_CLAMP)
    grow = 1.0 + 2.0 * k * dx / d_rotor
    return (1.0 - math.sqrt(1.0 - ct)) / (grow * grow)


@njit(cache=True, nogil=True)
def bastankhah_deficit(dx, dr, ct, d_rotor, k_star):
    """Gaussian deficit fraction at downstream ``dx`` and crosswind ``dr``."""
    if dx <= 0.0 or ct <= 0.0:
        return 0.0
    ct = min(ct, NEAR_WAKE_CLAMP)
    s = math.sqrt(1.0 - ct)
    beta = 0.5 * (1.0 + s) / s
    sigma_d = k_star * dx / d_rotor + 0.2 * math.sqrt(beta)
    a = min(ct / (8.0 * sigma_d * sigma_d), NEAR_WAKE_CLAMP)
    sigma = sigma_d * d_rotor
    return (1.0 - math.sqrt(1.0 - a)) * math.exp(-dr * dr / (2.0 * sigma * sigma))


@njit(cache=True, nogil=True)
def _deficit(model, dx, dr, ct, d_rotor, k):
    if model == JENSEN:
        return jensen_deficit(dx, dr, ct, d_rotor, k)
    return bastankhah_deficit(dx, dr, ct, d_rotor, k)


def combine_deficits(deficits):
    """Root-sum-square superposition, capped at 1."""
    return min(math.sqrt(math.fsum(d * d for d in deficits)), 1.0)


@njit(cache=True, nogil=True)
def wind_frame(x, y, direction_deg):
    """Downstream and crosswind coordinates for a meteorological from-direction."""
    th = math.radians(direction_deg)
    s, c = math.sin(th), math.cos(th)
    n = x.shape[0]
    xd = np.empty(n)
    yd = np.empty(n)
    for i in range(n):
        xd[i] = -(x[i] * s + y[i] * c)
        yd[i] = x[i] * c - y[i] * s
    return xd, yd


# Gaussian contributions beyond exp(-40) are below double precision once squared
GAUSS_CUTOFF = 80.0


@njit(cache=True, nogil=True)
def sweep_sorted(sxd, syd, start, speeds, cts, eps, amp0, scale, free_speed, curves, d_rotor, model,
                 k, local):
    """Upstream sweep over turbines already sorted by downstream coordinate.

    Entries before ``start`` are taken as final, so a caller that moves one
    turbine can resume the sweep from its sorted position.
    """
    n = sxd.shape[0]
    half_d = 0.5 * d_rotor
    for a in range(start, n):
        total = 0.0
        xa = sxd[a]
        ya = syd[a]
        for b in range(a):
            if cts[b] <= 0.0:
                continue
            dx = xa - sxd[b]
            if dx <= TIE_TOL:
                continue
            dr = ya - syd[b]
            if model == JENSEN:
                if abs(dr) > half_d + k * dx:
                    continue
                grow = 1.0 + 2.0 * k * dx / d_rotor
                d = amp0[b] / (grow * grow)
            else:
                sigma_d = k * dx / d_rotor + eps[b]
                sigma = sigma_d * d_rotor
                z = dr * dr / (sigma * sigma)
                if z > GAUSS_CUTOFF:
                    continue
                aa = min(cts[b] / (8.0 * sigma_d * sigma_d), NEAR_WAKE_CLAMP)
                d = (1.0 - math.sqrt(1.0 - aa)) * math.exp(-0.5 * z)
            d *= scale[b]
            total += d * d
        deficit = min(math.sqrt(total), 1.0)
        u = free_speed * (1.0 - deficit)
        speeds[a] = u
        ct = thrust_kernel(curves, u)
        cts[a] = ct
        if ct > 0.0:
            ct = min(ct, NEAR_WAKE_CLAMP)
            s = math.sqrt(1.0 - ct)
            eps[a] = 0.2 * math.sqrt(0.5 * (1.0 + s) / s)
            amp0[a] = 1.0 - s
        else:
            eps[a] = 0.0
            amp0[a] = 0.0
        scale[a] = u / free_speed if (local and free_speed > 0.0) else 1.0


@njit(cache=True, nogil=True)
def sweep_kernel(x, y, direction_deg, free_speed, curves, d_rotor, model, k, local):
    """Effective inflow and Ct of every turbine for one inflow direction."""
    n = x.shape[0]
    speeds = np.empty(n)
    cts = np.empty(n)
    if n == 0:
        return speeds, cts
    xd, yd = wind_frame(x, y, direction_deg)
    order = np.argsort(xd, kind="mergesort")
    sxd = xd[order]
    syd = yd[order]
    su = np.empty(n)
    sct = np.empty(n)
    eps = np.empty(n)
    amp0 = np.empty(n)
    scale = np.empty(n)
    sweep_sorted(sxd, syd, 0, su, sct, eps, amp0, scale, free_speed, curves, d_rotor, model, k, local)
    for p in range(n):
        speeds[order[p]] = su[p]
        cts[order[p]] = sct[p]
    return speeds, cts


def as_positions(layout):
    pos = np.ascontiguousarray(np.asarray(layout, dtype=float).reshape(-1, 2))
    return pos


def check_distinct(pos, tol=1e-9):
    if len(pos) < 2:
        return
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    if dist.min() <= tol:
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        raise InvalidLayout(f"turbines {i} and {j} are coincident")


def rotate_to_wind_frame(layout, direction):
    """Return an (n, 2) array of (downstream, crosswind) coordinates.

    Row order follows the input, so row ``i`` is original turbine ``i``.
    """
    pos = as_positions(layout)
    xd, yd = wind_frame(pos[:, 0].copy(), pos[:, 1].copy(), float(direction))
    return np.column_stack([xd, yd])


def effective_speeds(layout, spec: TurbineSpec, direction, free_speed, cfg=WakeModelConfig()):
    if free_speed < 0:
        raise InvalidInput("free_speed must be non-negative")
    pos = as_positions(layout)
    check_distinct(pos)
    speeds, _ = sweep_kernel(pos[:, 0].copy(), pos[:, 1].copy(), float(direction), float(free_speed),
                             spec.curves, spec.rotor_diameter, cfg.code, cfg.expansion, cfg.local)
    return speeds

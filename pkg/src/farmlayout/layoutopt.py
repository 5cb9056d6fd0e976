"""Multi-start penalised gradient ascent on AEP."""
from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numba import njit

from .aep import HOURS_PER_YEAR, EvaluationReport, aep_kernel, compute_aep, rose_arrays
from .geometry import (Boundary, distance_to_boundary, inside_kernel, nearest_on_boundary,
                       penalty_kernel)
from .turbine import InvalidInput, TurbineSpec, power_kernel
from .wake import WakeModelConfig, as_positions, sweep_sorted, wind_frame
from .windrose import WindRose

log = logging.getLogger(__name__)


class InitializationFailure(RuntimeError):
    pass


class OptimizationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizationConfig:
    n_starts: int = 30
    n_sequences: int = 3
    n_iterations: int = 70
    seed: int = 0
    min_spacing: float = 2.0  # rotor diameters
    initial_step: float = 200.0  # m
    penalty_weight: float = 1e-4  # GWh per m², first sequence
    penalty_growth: float = 10.0
    penalty_weight_schedule: tuple | None = None
    fd_step: float = 1.0  # m
    max_step: float = 2000.0  # m
    max_halvings: int = 8
    threads: int = 1

    def __post_init__(self):
        for name in ("n_starts", "n_sequences", "n_iterations"):
            if int(getattr(self, name)) < 1:
                raise InvalidInput(f"{name} must be at least 1")
        if self.min_spacing <= 0 or self.initial_step <= 0 or self.fd_step <= 0:
            raise InvalidInput("min_spacing, initial_step and fd_step must be positive")
        if self.penalty_weight_schedule is not None:
            sched = tuple(float(w) for w in self.penalty_weight_schedule)
            if len(sched) != self.n_sequences:
                raise InvalidInput("penalty_weight_schedule needs one weight per sequence")
            object.__setattr__(self, "penalty_weight_schedule", sched)

    def weights(self):
        if self.penalty_weight_schedule is not None:
            return list(self.penalty_weight_schedule)
        return [self.penalty_weight * self.penalty_growth**s for s in range(self.n_sequences)]

    def to_dict(self):
        d = asdict(self)
        if d["penalty_weight_schedule"] is not None:
            d["penalty_weight_schedule"] = list(d["penalty_weight_schedule"])
        return d


@dataclass
class StartResult:
    index: int
    seed: int
    initial_layout: np.ndarray
    final_layout: np.ndarray | None
    report: EvaluationReport | None
    history: list = field(default_factory=list)  # (sequence, iteration, weight, objective, accepted)
    error: str | None = None


@dataclass
class OptimizedResult:
    best_layout: np.ndarray
    best_report: EvaluationReport
    per_start_history: list
    wall_time: float
    best_start: int
    starts: list


# --------------------------------------------------------------------------- sampling

def latin_hypercube_layout(n, boundary: Boundary, seed, max_tries=100, min_separation=1.0):
    """One turbine per stratum on each axis of the boundary's bounding box."""
    if n < 1:
        raise InvalidInput("need at least one turbine")
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = boundary.bbox()
    wx, wy = (xmax - xmin) / n, (ymax - ymin) / n
    perm = rng.permutation(n)
    vx, vy = boundary.xy
    pos = np.empty((n, 2))
    for i in range(n):
        cx, cy = xmin + i * wx, ymin + perm[i] * wy
        for _ in range(max_tries):
            px, py = cx + rng.random() * wx, cy + rng.random() * wy
            if inside_kernel(px, py, vx, vy):
                break
        else:
            _, px, py = nearest_on_boundary(px, py, vx, vy)
        pos[i] = px, py
    if n > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < min_separation:
            raise InitializationFailure(
                f"could not place {n} turbines at least {min_separation} m apart inside the boundary")
    return pos


# --------------------------------------------------------------------------- objective

@njit(cache=True, nogil=True)
def objective_kernel(x, y, dirs, freqs, speeds, curves, d_rotor, model, k, local, vx, vy, min_sp, w):
    aep, _ = aep_kernel(x, y, dirs, freqs, speeds, curves, d_rotor, model, k, local)
    return aep - w * penalty_kernel(x, y, vx, vy, min_sp)


@njit(cache=True, nogil=True)
def _aep_partials(x, y, h, dirs, freqs, speeds, curves, d_rotor, model, k, local):
    """AEP at x±h and y±h for every turbine, shape (n, 2 axes, 2 signs).

    Moving one turbine leaves everything sorted upstream of it untouched, so
    each perturbed sweep restarts at the first sorted slot that can change.
    """
    n = x.shape[0]
    out = np.zeros((n, 2, 2))
    su = np.empty(n)
    sct = np.empty(n)
    eps = np.empty(n)
    amp0 = np.empty(n)
    scale = np.empty(n)
    wu = np.empty(n)
    wct = np.empty(n)
    weps = np.empty(n)
    wamp = np.empty(n)
    wscale = np.empty(n)
    wxd = np.empty(n)
    wyd = np.empty(n)
    prefix = np.empty(n + 1)
    for b in range(dirs.shape[0]):
        f = freqs[b]
        if f == 0.0:
            continue
        free = speeds[b]
        xd, yd = wind_frame(x, y, dirs[b])
        order = np.argsort(xd, kind="mergesort")
        slot = np.empty(n, dtype=np.int64)
        for p in range(n):
            slot[order[p]] = p
        sxd = xd[order]
        syd = yd[order]
        sweep_sorted(sxd, syd, 0, su, sct, eps, amp0, scale, free, curves, d_rotor, model, k, local)
        prefix[0] = 0.0
        for p in range(n):
            prefix[p + 1] = prefix[p] + power_kernel(curves, su[p])
        th = math.radians(dirs[b])
        sn, cs = math.sin(th), math.cos(th)
        for i in range(n):
            old = slot[i]
            for axis in range(2):
                for sgn in range(2):
                    delta = h if sgn == 0 else -h
                    xi = x[i] + delta if axis == 0 else x[i]
                    yi = y[i] + delta if axis == 1 else y[i]
                    nxd = -(xi * sn + yi * cs)
                    nyd = xi * cs - yi * sn
                    # stable-sort slot of the moved turbine among the others
                    new = 0
                    for j in range(n):
                        if j != i and (xd[j] < nxd or (xd[j] == nxd and j < i)):
                            new += 1
                    start = min(old, new)
                    q = 0
                    for p in range(n):
                        if p == new:
                            wxd[p] = nxd
                            wyd[p] = nyd
                            continue
                        if q == old:
                            q += 1
                        wxd[p] = sxd[q]
                        wyd[p] = syd[q]
                        wu[p] = su[q]
                        wct[p] = sct[q]
                        weps[p] = eps[q]
                        wamp[p] = amp0[q]
                        wscale[p] = scale[q]
                        q += 1
                    sweep_sorted(wxd, wyd, start, wu, wct, weps, wamp, wscale, free, curves, d_rotor,
                                 model, k, local)
                    total = prefix[start]
                    for p in range(start, n):
                        total += power_kernel(curves, wu[p])
                    out[i, axis, sgn] += f * total
    return out * (HOURS_PER_YEAR / 1000.0)


@njit(cache=True, nogil=True)
def gradient_kernel(x, y, h, dirs, freqs, speeds, curves, d_rotor, model, k, local, vx, vy, min_sp, w):
    """Central-difference gradient of the penalised objective, shape (n, 2)."""
    n = x.shape[0]
    aep_pm = _aep_partials(x, y, h, dirs, freqs, speeds, curves, d_rotor, model, k, local)
    g = np.empty((n, 2))
    px = x.copy()
    py = y.copy()
    for i in range(n):
        for axis in range(2):
            pen = np.empty(2)
            for sgn in range(2):
                delta = h if sgn == 0 else -h
                if axis == 0:
                    px[i] = x[i] + delta
                else:
                    py[i] = y[i] + delta
                pen[sgn] = penalty_kernel(px, py, vx, vy, min_sp)
                px[i] = x[i]
                py[i] = y[i]
            plus = aep_pm[i, axis, 0] - w * pen[0]
            minus = aep_pm[i, axis, 1] - w * pen[1]
            g[i, axis] = (plus - minus) / (2.0 * h)
    return g


class Problem:
    """Immutable bundle of everything the objective needs, packed for the kernels."""

    def __init__(self, spec: TurbineSpec, rose: WindRose, boundary: Boundary, wake_cfg=WakeModelConfig(),
                 min_spacing_d=2.0):
        self.spec = spec
        self.rose = rose
        self.boundary = boundary
        self.wake_cfg = wake_cfg
        self.min_spacing = min_spacing_d * spec.rotor_diameter
        self.dirs, self.freqs, self.speeds = rose_arrays(rose)
        self.vx, self.vy = boundary.xy

    def _wake_args(self):
        c = self.wake_cfg
        return (self.dirs, self.freqs, self.speeds, self.spec.curves, self.spec.rotor_diameter,
                c.code, c.expansion, c.local)

    def objective(self, pos, weight):
        pos = as_positions(pos)
        return float(objective_kernel(pos[:, 0].copy(), pos[:, 1].copy(), *self._wake_args(),
                                      self.vx, self.vy, self.min_spacing, float(weight)))

    def gradient(self, pos, weight, fd_step=1.0):
        pos = as_positions(pos)
        return gradient_kernel(pos[:, 0].copy(), pos[:, 1].copy(), float(fd_step), *self._wake_args(),
                               self.vx, self.vy, self.min_spacing, float(weight))

    def penalty(self, pos):
        pos = as_positions(pos)
        return float(penalty_kernel(pos[:, 0].copy(), pos[:, 1].copy(), self.vx, self.vy, self.min_spacing))


def penalized_objective(layout, spec, rose, cfg, boundary, min_spacing, penalty_weight):
    """AEP (GWh) minus weighted squared constraint violations; ``min_spacing`` in metres."""
    prob = Problem(spec, rose, boundary, cfg, min_spacing / spec.rotor_diameter)
    return prob.objective(layout, penalty_weight)


# --------------------------------------------------------------------------- feasibility

def is_feasible(pos, boundary: Boundary, min_spacing, tol=1e-6):
    vx, vy = boundary.xy
    if not all(inside_kernel(float(px), float(py), vx, vy) for px, py in pos):
        return False
    if len(pos) > 1:
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < min_spacing - tol:
            return False
    return True


def project_feasible(pos, boundary: Boundary, min_spacing, max_passes=1000):
    """Pull stray turbines onto the boundary and push crowded pairs apart."""
    vx, vy = boundary.xy
    pos = np.array(pos, dtype=float)
    n = len(pos)
    target = min_spacing * (1 + 1e-9) + 1e-6

    def clamp_inside():
        for i in range(n):
            if not inside_kernel(pos[i, 0], pos[i, 1], vx, vy):
                _, bx, by = nearest_on_boundary(pos[i, 0], pos[i, 1], vx, vy)
                pos[i] = bx, by

    clamp_inside()
    for _ in range(max_passes):
        moved = False
        for i in range(n):
            for j in range(i + 1, n):
                d = pos[j] - pos[i]
                dist = math.hypot(d[0], d[1])
                if dist >= min_spacing:
                    continue
                if dist == 0.0:
                    u = np.array([1.0, 0.0])
                else:
                    u = d / dist
                shift = 0.5 * (target - dist) * u
                pos[i] -= shift
                pos[j] += shift
                moved = True
        clamp_inside()
        if not moved:
            break
    return pos


# --------------------------------------------------------------------------- optimisation

def _ascend(prob: Problem, pos, cfg: OptimizationConfig, history):
    step = cfg.initial_step
    for seq, w in enumerate(cfg.weights()):
        f = prob.objective(pos, w)
        stalled = False
        for it in range(cfg.n_iterations):
            if stalled:
                # position and weight unchanged since the failed search: same outcome
                history.append((seq, it, w, f, False))
                continue
            g = prob.gradient(pos, w, cfg.fd_step)
            gmax = np.hypot(g[:, 0], g[:, 1]).max()
            accepted = False
            if gmax > 0 and np.isfinite(gmax):
                direction = g / gmax
                s = step
                for _ in range(cfg.max_halvings + 1):
                    trial = pos + s * direction
                    ft = prob.objective(trial, w)
                    if ft > f:
                        accepted = True
                        break
                    s *= 0.5
            if accepted:
                pos, f = trial, ft
                step = min(2.0 * s, cfg.max_step)
            else:
                stalled = True
            history.append((seq, it, w, f, accepted))
        step = cfg.initial_step
    return pos


def run_start(prob: Problem, n_turbines, cfg: OptimizationConfig, index, initial=None):
    seed = cfg.seed + index
    if initial is None:
        initial = latin_hypercube_layout(n_turbines, prob.boundary, seed)
    history = []
    res = StartResult(index=index, seed=seed, initial_layout=initial, final_layout=None, report=None,
                      history=history)
    try:
        pos = _ascend(prob, initial.copy(), cfg, history)
        pos = project_feasible(pos, prob.boundary, prob.min_spacing)
        if not is_feasible(pos, prob.boundary, prob.min_spacing):
            raise OptimizationFailure("layout still infeasible after projection")
        res.final_layout = pos
        res.report = compute_aep(pos, prob.spec, prob.rose, prob.wake_cfg)
    except (OptimizationFailure, InvalidInput) as exc:
        res.error = str(exc)
        log.warning("start %d discarded: %s", index, exc)
    return res


def optimize(spec: TurbineSpec, rose: WindRose, boundary: Boundary, cfg=OptimizationConfig(),
             wake_cfg=WakeModelConfig(), n_turbines=None, initial_layouts=None) -> OptimizedResult:
    """Best feasible layout over ``cfg.n_starts`` independent LHS starts.

    ``n_turbines`` defaults to the count the boundary area supports at
    3.5 MW/km² for this turbine rating.
    """
    from .aep import capacity_plan
    from .geometry import polygon_area

    if n_turbines is None:
        n_turbines = capacity_plan(polygon_area(boundary), 3.5, spec.rated_power)["n_turbines"]
    if n_turbines < 1:
        raise InvalidInput("boundary too small for a single turbine")
    prob = Problem(spec, rose, boundary, wake_cfg, cfg.min_spacing)
    t0 = time.perf_counter()
    inits = [None] * cfg.n_starts if initial_layouts is None else [as_positions(p) for p in initial_layouts]
    # sampling is cheap and keeps initialisation errors out of the worker threads
    inits = [latin_hypercube_layout(n_turbines, boundary, cfg.seed + k) if p is None else p
             for k, p in enumerate(inits)]

    def work(k):
        return run_start(prob, n_turbines, cfg, k, inits[k])

    threads = max(1, int(cfg.threads))
    if threads == 1:
        starts = [work(k) for k in range(cfg.n_starts)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            starts = list(pool.map(work, range(cfg.n_starts)))
    wall = time.perf_counter() - t0

    ok = [s for s in starts if s.report is not None]
    if not ok:
        raise OptimizationFailure("every start was discarded as infeasible")
    best = ok[0]
    for s in ok[1:]:
        if s.report.aep > best.report.aep:
            best = s
    return OptimizedResult(best_layout=best.final_layout, best_report=best.report,
                           per_start_history=[s.history for s in starts], wall_time=wall,
                           best_start=best.index, starts=starts)


def default_threads():
    env = os.environ.get("FARMLAYOUT_THREADS")
    return int(env) if env else 1


# --------------------------------------------------------------------------- analysis

def compare_models(layout, spec: TurbineSpec, rose: WindRose):
    b = compute_aep(layout, spec, rose, WakeModelConfig("bastankhah")).aep
    j = compute_aep(layout, spec, rose, WakeModelConfig("jensen")).aep
    gap = abs(b - j) / b if b > 0 else 0.0
    return {"aep_bastankhah": b, "aep_jensen": j, "relative_gap": gap}


def edge_clustering_metric(layout, boundary: Boundary, band):
    """Share of turbines within ``band`` metres of the boundary outline."""
    if band <= 0:
        raise InvalidInput("band must be positive")
    pos = as_positions(layout)
    if len(pos) == 0:
        return 0.0
    near = sum(distance_to_boundary(p, boundary) <= band for p in pos)
    return near / len(pos)

"""Desk-scale stand-in for the Utsira Nord project area.

Writes a self-contained problem directory: a 13.4 km x 13.38 km rectangle,
the 15 MW reference turbine, a synthetic 6-hourly 100 m series (2000-2022)
and the 150 m rose binned from it.

    python -m farmlayout.analog OUT_DIR
"""
from __future__ import annotations

import sys
from pathlib import Path

from .geometry import Boundary
from .problem import write_json
from .turbine import reference_turbine, save_turbine
from .windrose import bin_time_series, synthetic_series, write_rose, write_time_series

WIDTH_M = 13_400.0
HEIGHT_M = 13_380.0


def analog_boundary():
    return Boundary.rectangle(WIDTH_M, HEIGHT_M)


def analog_rose(seed=0):
    return bin_time_series(synthetic_series(seed=seed))


def write_analog(out_dir, seed=0, with_series=True):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    samples = synthetic_series(seed=seed)
    if with_series:
        write_time_series(samples, out / "era5_like_100m.csv")
    write_rose(bin_time_series(samples), out / "rose.csv")
    save_turbine(reference_turbine(), out / "turbine.json")
    problem = {
        "boundary": [list(v) for v in analog_boundary().vertices],
        "turbine": "turbine.json",
        "rose": "rose.csv",
        "n_turbines": 41,
        "wake": {"model": "bastankhah", "k": 0.05, "k_star": 0.025},
        "optimizer": {"n_starts": 30, "n_sequences": 3, "n_iterations": 70, "seed": 0, "min_spacing": 2.0},
    }
    write_json(problem, out / "problem.json")
    return out / "problem.json"


if __name__ == "__main__":
    print(write_analog(sys.argv[1] if len(sys.argv) > 1 else "utsira_analog"))

"""Directional wind rose from a wind time series."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .turbine import InvalidInput, shear_extrapolate

N_BINS = 36
BIN_WIDTH = 360.0 / N_BINS


@dataclass(frozen=True)
class WindSample:
    timestamp: str
    u: float | None = None
    v: float | None = None
    speed: float | None = None
    direction: float | None = None

    def speed_direction(self):
        if self.speed is not None and self.direction is not None:
            if self.speed < 0:
                raise InvalidInput(f"negative speed at {self.timestamp}")
            return float(self.speed), float(self.direction) % 360.0
        if self.u is not None and self.v is not None:
            return components_to_met(self.u, self.v)
        raise InvalidInput(f"sample {self.timestamp!r} has neither (u, v) nor (speed, direction)")


@dataclass(frozen=True)
class RoseBin:
    center_direction: float
    frequency: float
    mean_speed: float


@dataclass(frozen=True)
class WindRose:
    bins: tuple

    def __post_init__(self):
        if len(self.bins) != N_BINS:
            raise InvalidInput(f"a wind rose has {N_BINS} bins, got {len(self.bins)}")
        total = sum(b.frequency for b in self.bins)
        if any(b.frequency < 0 or b.mean_speed < 0 for b in self.bins):
            raise InvalidInput("negative frequency or speed in wind rose")
        if abs(total - 1.0) > 1e-9:
            raise InvalidInput(f"wind rose frequencies sum to {total!r}, not 1")

    @classmethod
    def from_arrays(cls, frequency, mean_speed, normalize=True):
        f = np.asarray(frequency, dtype=float)
        s = np.asarray(mean_speed, dtype=float)
        if normalize:
            f = f / f.sum()
        return cls(tuple(RoseBin(bin_center(k), float(f[k]), float(s[k])) for k in range(N_BINS)))

    @property
    def directions(self):
        return np.array([b.center_direction for b in self.bins])

    @property
    def frequencies(self):
        return np.array([b.frequency for b in self.bins])

    @property
    def speeds(self):
        return np.array([b.mean_speed for b in self.bins])

    def dominant(self):
        return max(self.bins, key=lambda b: b.frequency)

    def mean_speed(self):
        return float(np.dot(self.frequencies, self.speeds))

    def rotated(self, steps):
        """Rose with every direction shifted clockwise by ``steps`` bins."""
        f = np.roll(self.frequencies, steps)
        s = np.roll(self.speeds, steps)
        return WindRose.from_arrays(f, s, normalize=False)


def bin_center(k):
    return BIN_WIDTH * k + BIN_WIDTH / 2.0


def bin_index(direction):
    d = float(direction) % 360.0
    k = int(d // BIN_WIDTH)
    # d % 360 can round up to exactly 360 for tiny negative inputs
    return min(k, N_BINS - 1)


def components_to_met(u, v):
    """(u, v) wind components to (speed, meteorological from-direction in degrees)."""
    speed = math.hypot(u, v)
    if speed == 0.0:
        return 0.0, 0.0
    direction = (270.0 - math.degrees(math.atan2(v, u))) % 360.0
    if direction >= 360.0:
        direction = 0.0
    return speed, direction


def bin_time_series(samples, shear_alpha=0.15, z_ref=100.0, z_hub=150.0, energy_weighted=False):
    """Aggregate samples into the 36-bin rose.

    Speeds are shear-extrapolated to hub height before binning. The bin speed
    is the arithmetic mean, or the cubic mean when ``energy_weighted``.
    """
    if not samples:
        raise InvalidInput("cannot build a wind rose from an empty series")
    counts = np.zeros(N_BINS)
    sums = np.zeros(N_BINS)
    for s in samples:
        speed, direction = s.speed_direction()
        hub = shear_extrapolate(speed, z_ref, z_hub, shear_alpha)
        k = bin_index(direction)
        counts[k] += 1
        sums[k] += hub**3 if energy_weighted else hub
    freq = counts / counts.sum()
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
    if energy_weighted:
        mean = np.cbrt(mean)
    return WindRose.from_arrays(freq, mean, normalize=False)


def read_time_series(path):
    """Read ``timestamp,u100,v100`` or ``timestamp,speed,direction`` CSV."""
    samples = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidInput(f"{path}: empty file") from None
        if header[:3] == ["timestamp", "u100", "v100"]:
            uv = True
        elif header[:3] == ["timestamp", "speed", "direction"]:
            uv = False
        else:
            raise InvalidInput(f"{path}: line 1: unexpected header {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) < 3:
                    raise ValueError("expected 3 columns")
                a, b = float(row[1]), float(row[2])
                if not (math.isfinite(a) and math.isfinite(b)):
                    raise ValueError("non-finite value")
            except ValueError as exc:
                raise InvalidInput(f"{path}: line {lineno}: malformed row {row!r} ({exc})") from None
            if uv:
                samples.append(WindSample(row[0], u=a, v=b))
            else:
                if a < 0:
                    raise InvalidInput(f"{path}: line {lineno}: negative speed")
                samples.append(WindSample(row[0], speed=a, direction=b))
    return samples


def write_rose(rose: WindRose, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["center_deg", "frequency", "mean_speed_ms"])
        for b in rose.bins:
            w.writerow([repr(b.center_direction), repr(b.frequency), repr(b.mean_speed)])


def read_rose(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != N_BINS:
        raise InvalidInput(f"{path}: expected {N_BINS} rose rows, got {len(rows)}")
    try:
        bins = tuple(RoseBin(float(r["center_deg"]), float(r["frequency"]), float(r["mean_speed_ms"]))
                     for r in rows)
    except (KeyError, ValueError) as exc:
        raise InvalidInput(f"{path}: malformed rose file ({exc})") from None
    for k, b in enumerate(bins):
        if abs(b.center_direction - bin_center(k)) > 1e-9:
            raise InvalidInput(f"{path}: row {k + 2} has center {b.center_direction}, expected {bin_center(k)}")
    return WindRose(bins)


def synthetic_series(start="2000-01-01", end="2023-01-01", hours=6, seed=0,
                     modes=((337.5, 0.55, 6.0, 10.5), (135.0, 0.25, 3.0, 9.5), (225.0, 0.20, 2.0, 9.5)),
                     weibull_k=2.2):
    """Reproducible 6-hourly 100 m series drawn from a von Mises mixture.

    ``modes`` holds (mean direction deg, weight, concentration, mean speed m/s).
    The default is NNW-dominant with a south-easterly secondary lobe.
    """
    rng = np.random.default_rng(seed)
    times = np.arange(np.datetime64(start, "h"), np.datetime64(end, "h"), np.timedelta64(hours, "h"))
    n = len(times)
    weights = np.array([m[1] for m in modes], dtype=float)
    which = rng.choice(len(modes), size=n, p=weights / weights.sum())
    mu = np.radians([m[0] for m in modes])[which]
    kappa = np.array([m[2] for m in modes])[which]
    direction = np.degrees(rng.vonmises(mu, kappa)) % 360.0
    mean_speed = np.array([m[3] for m in modes])[which]
    scale = mean_speed / math.gamma(1.0 + 1.0 / weibull_k)
    speed = scale * rng.weibull(weibull_k, size=n)
    return [WindSample(str(t), speed=float(s), direction=float(d))
            for t, s, d in zip(times, speed, direction)]


def write_time_series(samples, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "speed", "direction"])
        for s in samples:
            speed, direction = s.speed_direction()
            w.writerow([s.timestamp, repr(speed), repr(direction)])


def synthetic_rose(seed=0, **kw):
    """36-bin NNW-dominant rose at 150 m built from :func:`synthetic_series`."""
    return bin_time_series(synthetic_series(seed=seed, **kw))

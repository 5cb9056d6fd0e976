import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from farmlayout.turbine import InvalidInput, shear_extrapolate
from farmlayout.windrose import (N_BINS, WindRose, WindSample, bin_index, bin_time_series,
                                 components_to_met, read_rose, read_time_series, synthetic_series,
                                 write_rose)


def test_components_from_north():
    assert components_to_met(0.0, -1.0) == (1.0, 0.0)


def test_components_from_east():
    # wind from the east blows toward the west: u < 0
    s, d = components_to_met(-1.0, 0.0)
    oracle = (270.0 - math.degrees(math.atan2(0.0, -1.0))) % 360.0
    assert s == 1.0
    assert d == pytest.approx(oracle) == pytest.approx(90.0)


def test_components_calm():
    assert components_to_met(0.0, 0.0) == (0.0, 0.0)


def test_single_bin_concentration():
    samples = [WindSample(f"t{i}", speed=8.0, direction=3.0) for i in range(10)]
    rose = bin_time_series(samples, 0.0, 100, 100)
    assert rose.bins[0].frequency == 1.0
    assert all(b.frequency == 0.0 and b.mean_speed == 0.0 for b in rose.bins[1:])
    assert rose.bins[0].mean_speed == 8.0


def test_bin_mean_is_arithmetic():
    samples = [WindSample("a", speed=5.0, direction=100.0), WindSample("b", speed=10.0, direction=101.0)]
    rose = bin_time_series(samples, 0.0, 100, 100)
    assert rose.bins[10].mean_speed == 7.5


def test_speeds_are_sheared_before_binning():
    samples = [WindSample("a", speed=10.0, direction=45.0)]
    rose = bin_time_series(samples, 0.15, 100, 150)
    assert rose.bins[4].mean_speed == shear_extrapolate(10.0, 100, 150, 0.15)


def test_energy_weighted_option():
    samples = [WindSample("a", speed=5.0, direction=100.0), WindSample("b", speed=10.0, direction=101.0)]
    rose = bin_time_series(samples, 0.0, 100, 100, energy_weighted=True)
    assert rose.bins[10].mean_speed == pytest.approx(((125 + 1000) / 2) ** (1 / 3))


def test_uniform_directions_give_flat_rose():
    n = 36_000
    d = (np.arange(n) + 0.5) * 360.0 / n
    samples = [WindSample(str(i), speed=7.0, direction=float(x)) for i, x in enumerate(d)]
    rose = bin_time_series(samples)
    counts = np.bincount((d // 10).astype(int), minlength=36)
    np.testing.assert_allclose(rose.frequencies, counts / n, rtol=0, atol=1e-15)
    assert np.all(np.abs(rose.frequencies - 1 / 36) <= 2 / math.sqrt(n))


def test_empty_series_rejected():
    with pytest.raises(InvalidInput):
        bin_time_series([])


def test_bin_edges():
    assert bin_index(0.0) == 0
    assert bin_index(9.999999) == 0
    assert bin_index(10.0) == 1
    assert bin_index(360.0 - 1e-12) == N_BINS - 1
    assert bin_index(-1e-20) == N_BINS - 1 or bin_index(-1e-20) == 0


@given(st.floats(0, 360, exclude_max=True))
def test_bin_assignment_total_and_exclusive(d):
    k = bin_index(d)
    assert 0 <= k < N_BINS
    assert 10 * k <= d < 10 * (k + 1)


@given(st.lists(st.tuples(st.floats(0, 30), st.floats(0, 360, exclude_max=True)), min_size=1, max_size=60))
def test_frequencies_sum_to_one(data):
    rose = bin_time_series([WindSample("t", speed=s, direction=d) for s, d in data])
    assert abs(rose.frequencies.sum() - 1.0) <= 1e-9


@given(st.lists(st.tuples(st.floats(0, 30), st.integers(0, 3599)), min_size=1, max_size=60))
def test_rotation_by_one_bin_is_cyclic(data):
    # directions on a 0.1 deg lattice so +10 deg is exact
    base = [WindSample("t", speed=s, direction=k / 10) for s, k in data]
    turned = [WindSample("t", speed=s, direction=((k + 100) % 3600) / 10) for s, k in data]
    r0, r1 = bin_time_series(base), bin_time_series(turned)
    np.testing.assert_array_equal(np.roll(r0.frequencies, 1), r1.frequencies)
    assert sorted(r0.speeds) == pytest.approx(sorted(r1.speeds), rel=1e-12)


@given(st.lists(st.tuples(st.floats(0, 30), st.floats(0, 360, exclude_max=True)), min_size=1, max_size=40),
       st.randoms())
def test_order_invariance(data, rnd):
    samples = [WindSample("t", speed=s, direction=d) for s, d in data]
    shuffled = samples[:]
    rnd.shuffle(shuffled)
    a, b = bin_time_series(samples), bin_time_series(shuffled)
    np.testing.assert_array_equal(a.frequencies, b.frequencies)
    np.testing.assert_allclose(a.speeds, b.speeds, rtol=1e-12)


def test_uv_csv(tmp_path):
    p = tmp_path / "ts.csv"
    p.write_text("timestamp,u100,v100\n2000-01-01T00,0,-5\n2000-01-01T06,-3,0\n")
    samples = read_time_series(p)
    rose = bin_time_series(samples, 0.0, 100, 100)
    assert rose.bins[0].frequency == 0.5 and rose.bins[9].frequency == 0.5
    assert rose.bins[0].mean_speed == 5.0 and rose.bins[9].mean_speed == 3.0


def test_malformed_row_names_line(tmp_path):
    p = tmp_path / "ts.csv"
    p.write_text("timestamp,speed,direction\n2000,5,10\n2001,abc,10\n")
    with pytest.raises(InvalidInput, match="line 3"):
        read_time_series(p)


def test_bad_header(tmp_path):
    p = tmp_path / "ts.csv"
    p.write_text("time,ws,wd\n1,2,3\n")
    with pytest.raises(InvalidInput, match="header"):
        read_time_series(p)


def test_rose_csv_round_trip(tmp_path, rose):
    p = tmp_path / "rose.csv"
    write_rose(rose, p)
    assert read_rose(p) == rose
    assert p.read_text().splitlines()[0] == "center_deg,frequency,mean_speed_ms"
    assert len(p.read_text().splitlines()) == 37


def test_rose_invariants(rose):
    assert len(rose.bins) == 36
    assert [b.center_direction for b in rose.bins] == [10 * k + 5 for k in range(36)]
    with pytest.raises(InvalidInput):
        WindRose(rose.bins[:35])


def test_synthetic_series_is_six_hourly_and_nnw():
    s = synthetic_series()
    assert s[0].timestamp.startswith("2000-01-01T00")
    assert s[1].timestamp.startswith("2000-01-01T06")
    assert s[-1].timestamp.startswith("2022-12-31T18")
    rose = bin_time_series(s)
    assert 325 <= rose.dominant().center_direction <= 345

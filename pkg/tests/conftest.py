import sys
import numpy as np
import pytest

from farmlayout.analog import analog_boundary, analog_rose
from farmlayout.turbine import TurbineSpec, reference_turbine


@pytest.fixture(scope="session")
def spec():
    return reference_turbine()


@pytest.fixture(scope="session")
def rose():
    return analog_rose()


@pytest.fixture(scope="session")
def boundary():
    return analog_boundary()


@pytest.fixture(scope="session")
def no_thrust_spec():
    base = reference_turbine()
    return TurbineSpec(rotor_diameter=base.rotor_diameter, hub_height=base.hub_height,
                       rated_power=base.rated_power, cut_in=base.cut_in, cut_out=base.cut_out,
                       power_curve=base.power_curve,
                       thrust_curve=tuple((p.speed, 0.0) for p in base.thrust_curve))


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t**2)


@pytest.fixture(scope="session")
def smooth_spec():
    """Reference geometry with C2 analytic curves sampled at 0.25 m/s, for gradient probes."""
    v = np.arange(3.0, 25.01, 0.25)
    power = 15.0 * _smoothstep((v - 3.0) / 9.0)
    ct = 0.8 * (1.0 - 0.75 * _smoothstep((v - 8.0) / 10.0))
    return TurbineSpec(rotor_diameter=240.0, hub_height=150.0, rated_power=15.0, cut_in=3.0, cut_out=25.0,
                       power_curve=tuple(zip(v.tolist(), power.tolist())),
                       thrust_curve=tuple(zip(v.tolist(), ct.tolist())))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)

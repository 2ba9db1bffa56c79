"""Shared helpers: a hand-laid 10-vehicle topology and small configs."""

import pytest

from vanetsim.config import SimConfig, RoadConfig
from vanetsim.mobility import Heading, VehicleState


def vehicle(vid, x, y=2.0, speed=10.0, heading=Heading.FORWARD, lane=0):
    return VehicleState(id=vid, x=x, y=y, speed=speed, heading=heading, lane=lane)


# One source (1), one destination (10), and a corridor where the greedy
# path relays through the busiest vehicle (6, five neighbors in range)
# while a quieter detour exists through 8.  All vehicles co-moving at the
# same speed so link lifetimes never differentiate the choices.
EXAMPLE_XS = {
    1: 0.0,
    2: 20.0,
    3: 40.0,
    4: 60.0,
    5: 220.0,
    8: 400.0,
    6: 460.0,
    7: 550.0,
    9: 630.0,
    10: 690.0,
}


@pytest.fixture
def example_world():
    return [vehicle(vid, x) for vid, x in sorted(EXAMPLE_XS.items())]


@pytest.fixture
def example_config():
    return SimConfig(
        num_vehicles=10,
        comm_range_m=250.0,
        lambda_pps=10000.0,
        slot_s=13e-6,
        road=RoadConfig(length_m=1000.0),
    )


def tiny_config(**overrides) -> SimConfig:
    """A fast-running config for engine and CLI tests."""
    defaults = dict(
        num_vehicles=12,
        speed_min_kmh=50.0,
        speed_max_kmh=50.0,
        total_ticks=60,
        dt_s=0.5,
        traffic_lambda_pps=0.2,
        lambda_pps=10000.0,
        seed=7,
        drain_ticks=10,
    )
    defaults.update(overrides)
    return SimConfig(**defaults)

"""Vehicle placement and movement on the highway.

Vehicles keep a constant speed and lane for a whole run; positions
advance linearly each tick and wrap around the road ends so the density
stays constant.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from .config import RoadConfig, SimConfig


class Heading(IntEnum):
    """Travel direction along the road axis; the value is the x sign."""

    FORWARD = 1
    BACKWARD = -1


@dataclass(frozen=True)
class VehicleState:
    id: int
    x: float
    y: float
    speed: float
    heading: Heading
    lane: int

    @property
    def velocity_x(self) -> float:
        return self.speed * float(self.heading)


def spawn_vehicles(config: SimConfig, rng: np.random.Generator) -> list[VehicleState]:
    """Place ``num_vehicles`` uniformly along the road on random lanes.

    Headings follow the lane side (lower half forward, upper half
    backward) and speeds are drawn uniformly from the configured km/h
    range, converted to m/s.  Pure function of (config, rng state).
    """
    config.validate()
    road = config.road
    n = config.num_vehicles
    xs = rng.uniform(0.0, road.length_m, size=n)
    lanes = rng.integers(0, road.lanes, size=n)
    speeds = rng.uniform(config.speed_min_mps, config.speed_max_mps, size=n)
    vehicles = []
    for i in range(n):
        lane = int(lanes[i])
        heading = Heading.FORWARD if lane < road.lanes_per_direction else Heading.BACKWARD
        vehicles.append(
            VehicleState(
                id=i,
                x=float(xs[i]),
                y=road.lane_center(lane),
                speed=float(speeds[i]),
                heading=heading,
                lane=lane,
            )
        )
    return vehicles


def advance(vehicles: list[VehicleState], dt: float, road: RoadConfig) -> list[VehicleState]:
    """Move every vehicle by one time step; x wraps modulo the road length."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    length = road.length_m
    return [replace(v, x=(v.x + v.velocity_x * dt) % length) for v in vehicles]

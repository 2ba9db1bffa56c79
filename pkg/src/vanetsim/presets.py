"""Canned configurations for the headline experiments.

``table1()`` is the literal parameter set of the simulated scenario
(heavy packet load, 1 ms ticks).  The two grid presets reproduce the
comparison figures at desk scale: each keeps the full contention load in
the analytic MAC model but samples delay with a light probe stream, and
each picks the tick length that matches the phenomenon it measures.
Delay and delivery trends need ticks long enough for mobility to
reshuffle links under in-flight packets; the broken-link trend needs a
short horizon where route interruptions are dominated by sparse-regime
re-establishment failures rather than by relay turnover.
"""

from __future__ import annotations

from dataclasses import replace

from .config import SimConfig

# Axes of the comparison grid.
GRID_VEHICLE_COUNTS = (12, 24, 36, 48, 60)
GRID_SPEEDS_KMH = (30.0, 80.0)
GRID_PROTOCOLS = ("proposed", "gpsr")
GRID_SEEDS = tuple(range(20))


def table1() -> SimConfig:
    """The default scenario exactly as configured out of the box."""
    return SimConfig()


def delay_grid_base() -> SimConfig:
    """Base config for the end-to-end delay / delivery-rate trend grid."""
    return replace(
        table1(),
        dt_s=1.0,
        traffic_lambda_pps=0.01,
        drain_ticks=64,
        maintenance_interval_ticks=1,
        monitored_routes=10,
        monitored_min_gap_m=450.0,
    )


def broken_links_grid_base() -> SimConfig:
    """Base config for the broken-links trend grid.

    Packet probes are disabled: the metric is carried entirely by the
    monitored standing sessions.
    """
    return replace(
        table1(),
        dt_s=0.05,
        traffic_lambda_pps=0.0,
        drain_ticks=0,
        maintenance_interval_ticks=1,
        monitored_routes=60,
        monitored_min_gap_m=450.0,
    )

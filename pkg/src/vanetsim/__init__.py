"""Deterministic highway VANET routing simulator.

A seeded, tick-driven simulator of multi-hop packet routing between
vehicles on a bidirectional highway.  Two next-hop strategies are
implemented: a weighted protocol that combines expected MAC backoff,
predicted link lifetime and geographic progress, and a plain greedy
baseline that forwards to the neighbor closest to the destination.
"""

from .config import RoadConfig, SimConfig, ConfigError, parse_config_text, dump_config
from .mobility import Heading, VehicleState, spawn_vehicles, advance
from .linkmodel import LinkGeometry, LinkEstimate, geometry, let_same_direction, let_opposite_direction, link_expiration
from .macmodel import ClusterStats, BackoffEstimate, idle_probability, expected_backoffs, series_oracle, cluster_of
from .routing import (
    NeighborInfo,
    ForwardDecision,
    WorldSnapshot,
    weight,
    build_neighbor_view,
    select_next_hop_proposed,
    select_next_hop_gpsr,
    discover_route,
    maintain_route,
)
from .engine import PacketRecord, MetricsSummary, RunResult, run, sweep

__version__ = "0.1.0"

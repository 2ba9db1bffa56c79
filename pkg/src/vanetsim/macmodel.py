"""Expected MAC backoff count under Poisson contention.

A vehicle contends with its cluster (itself plus every vehicle in
range).  With per-vehicle arrival rate lambda, the cluster generates a
Poisson stream of rate C * lambda; the chance that a contention slot
stays idle is exp(-C * lambda * slot), and the expected number of
backoff rounds before a success is the inverse of that probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mobility import VehicleState
from .linkmodel import geometry

# Exponent cap before exponentiation; loads beyond this are outside the
# model's validity and the estimate simply saturates.
EXPONENT_CAP = 700.0


@dataclass(frozen=True)
class ClusterStats:
    cluster_size: int
    lambda_per_vehicle: float
    slot_seconds: float

    def __post_init__(self):
        if self.cluster_size < 1:
            raise ValueError("cluster_size must be >= 1")
        if self.lambda_per_vehicle < 0:
            raise ValueError("lambda_per_vehicle must be >= 0")
        if self.slot_seconds <= 0:
            raise ValueError("slot_seconds must be > 0")


@dataclass(frozen=True)
class BackoffEstimate:
    expected_backoffs: float
    success_prob_per_slot: float


def idle_probability(stats: ClusterStats, t: float) -> float:
    """Probability that no packet arrives in the cluster during time t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return math.exp(-stats.cluster_size * stats.lambda_per_vehicle * t)


def expected_backoffs(stats: ClusterStats) -> BackoffEstimate:
    """Expected backoff rounds before a successful slot; >= 1 always."""
    exponent = min(stats.cluster_size * stats.lambda_per_vehicle * stats.slot_seconds, EXPONENT_CAP)
    success = math.exp(-exponent)
    return BackoffEstimate(expected_backoffs=1.0 / success, success_prob_per_slot=success)


def backoff_exponent_count(cluster_size: int, lambda_pps: float, slot_s: float) -> float:
    """Convenience scalar form of expected_backoffs for engine hot paths."""
    exponent = min(cluster_size * lambda_pps * slot_s, EXPONENT_CAP)
    return 1.0 / math.exp(-exponent)


def series_oracle(stats: ClusterStats, max_terms: int) -> float:
    """Truncated sum of k * (1-P)^(k-1) * P, the geometric-mean identity.

    Test-only reference that validates the closed form against its own
    defining series.
    """
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    p = idle_probability(stats, stats.slot_seconds)
    if p >= 1.0:
        return 1.0
    total = 0.0
    failure_pow = 1.0  # (1-p)^(k-1)
    for k in range(1, max_terms + 1):
        total += k * failure_pow * p
        failure_pow *= 1.0 - p
    return total


def cluster_of(
    vehicle: VehicleState,
    all_vehicles: list[VehicleState],
    r: float,
    lambda_pps: float,
    slot_s: float,
) -> ClusterStats:
    """Contention cluster of a vehicle: itself plus every vehicle within r."""
    others = sum(
        1
        for v in all_vehicles
        if v.id != vehicle.id and geometry(vehicle, v).d_ij <= r
    )
    return ClusterStats(cluster_size=1 + others, lambda_per_vehicle=lambda_pps, slot_seconds=slot_s)

"""Next-hop selection and route maintenance.

Two strategies over the same one-hop neighbor view:

* ``proposed`` ranks neighbors by a normalized weight combining expected
  MAC backoff (fewer is better), link expiration time to the current
  forwarder (longer is better) and distance to the destination (closer
  is better), then forwards to the argmax.
* ``gpsr`` forwards to the neighbor geographically closest to the
  destination, and only if that neighbor makes strict progress; at a
  local maximum the packet is undeliverable (greedy-with-drop baseline).

Both deliver directly once the destination itself is in range.  All
decisions are pure functions of an immutable world snapshot, so routes
can be discovered, walked and repaired deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig, PROTOCOL_PROPOSED, PROTOCOL_GPSR, PROTOCOLS
from .macmodel import EXPONENT_CAP
from .mobility import VehicleState

# ForwardDecision outcomes.
DIRECT = "direct"
NEXT_HOP = "next_hop"
NO_ROUTE = "no_route"

# maintain_route statuses.
INTACT = "intact"
REPAIRED = "repaired"
BROKEN = "broken"

_BOUNDS_EPS = 1e-12


class WeightContractError(ValueError):
    """A weight ratio fell outside [0, 1]; the caller passed stale maxima."""


@dataclass(frozen=True)
class NeighborInfo:
    """One row of a forwarder's neighbor view."""

    neighbor_id: int
    distance_to_dest: float
    let_to_current: float  # seconds; math.inf when the link never expires
    expected_backoffs: float


@dataclass(frozen=True)
class ForwardDecision:
    outcome: str  # DIRECT, NEXT_HOP or NO_ROUTE
    next_hop: int | None = None
    weight_table: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class MaintenanceResult:
    status: str  # INTACT, REPAIRED or BROKEN
    repaired_from: int | None = None
    route: tuple[int, ...] = ()


class WorldSnapshot:
    """Frozen per-tick view: pairwise distances, clusters, backoff estimates.

    Built once per tick and shared by every routing decision in it.
    """

    def __init__(self, vehicles: list[VehicleState], config: SimConfig):
        self.vehicles = vehicles
        self.config = config
        n = len(vehicles)
        self.ids = np.array([v.id for v in vehicles], dtype=np.int64)
        self.index_of = {v.id: i for i, v in enumerate(vehicles)}
        self.x = np.array([v.x for v in vehicles])
        self.y = np.array([v.y for v in vehicles])
        self.vx = np.array([v.velocity_x for v in vehicles])
        dx = self.x[:, None] - self.x[None, :]
        dy = self.y[:, None] - self.y[None, :]
        self.dist = np.hypot(dx, dy)
        self.in_range = self.dist <= config.comm_range_m
        # Row sums include the vehicle itself (dist_ii = 0), matching the
        # "self plus one-hop neighborhood" cluster definition.
        self.cluster_sizes = self.in_range.sum(axis=1)
        exponent = np.minimum(
            self.cluster_sizes * (config.lambda_pps * config.slot_s), EXPONENT_CAP
        )
        self.nbar = 1.0 / np.exp(-exponent)
        self._n = n
        # Extremes of every weight computed against this snapshot, kept so
        # runs can audit the [0, 1] bound without retaining each table.
        self.weight_min = math.inf
        self.weight_max = -math.inf

    def distance(self, id_a: int, id_b: int) -> float:
        return float(self.dist[self.index_of[id_a], self.index_of[id_b]])

    def lets_from(self, idx: int) -> np.ndarray:
        """Link expiration times from vehicle index ``idx`` to every vehicle."""
        r = self.config.comm_range_m
        w = np.abs(self.y[idx] - self.y)
        u = self.vx[idx] - self.vx
        x_rel = self.x[idx] - self.x
        d = self.dist[idx]
        root_range = np.sqrt(np.maximum(r * r - w * w, 0.0))
        root_dist = np.sqrt(np.maximum(d * d - w * w, 0.0))
        abs_u = np.abs(u)
        safe_u = np.where(abs_u > 0.0, abs_u, 1.0)
        closing = (x_rel * u) < 0.0
        lets = np.where(closing, root_range + root_dist, root_range - root_dist) / safe_u
        lets = np.maximum(lets, 0.0)
        return np.where(abs_u > 0.0, lets, math.inf)


def weight(
    info: NeighborInfo,
    nbar_max: float,
    let_max: float,
    d_max: float,
    alpha: float,
    beta: float,
    gamma: float,
) -> float:
    """Forwarding weight of one neighbor, in [0, 1].

    The maxima must be taken over the same neighbor view the row came
    from; infinite LETs are clamped to let_max (ratio 1) and a zero
    d_max (every neighbor already at the destination) scores the
    distance term as 1.
    """
    if min(alpha, beta, gamma) < 0 or abs(alpha + beta + gamma - 1.0) > 1e-12:
        raise ValueError("coefficients must be nonnegative and sum to 1 within 1e-12")
    if nbar_max < 1.0:
        raise ValueError("nbar_max must be >= 1")
    if let_max < 0.0 or d_max < 0.0:
        raise ValueError("maxima must be nonnegative")

    backoff_term = (nbar_max - info.expected_backoffs) / nbar_max
    let_clamped = min(info.let_to_current, let_max)
    let_term = (let_clamped / let_max) if let_max > 0.0 else 0.0
    dist_term = ((d_max - info.distance_to_dest) / d_max) if d_max > 0.0 else 1.0
    for term in (backoff_term, let_term, dist_term):
        if term < -_BOUNDS_EPS or term > 1.0 + _BOUNDS_EPS:
            raise WeightContractError(
                f"weight ratio {term!r} outside [0, 1]; maxima do not dominate the row"
            )
    return alpha * backoff_term + beta * let_term + gamma * dist_term


def _as_snapshot(world, config: SimConfig) -> WorldSnapshot:
    if isinstance(world, WorldSnapshot):
        return world
    return WorldSnapshot(world, config)


def _candidate_indices(snap: WorldSnapshot, cur_idx: int, visited) -> np.ndarray:
    mask = snap.in_range[cur_idx].copy()
    mask[cur_idx] = False
    if visited:
        for vid in visited:
            idx = snap.index_of.get(vid)
            if idx is not None:
                mask[idx] = False
    candidates = np.nonzero(mask)[0]
    if candidates.size > 1:
        candidates = candidates[np.argsort(snap.ids[candidates], kind="stable")]
    return candidates


def build_neighbor_view(
    current_id: int,
    dest_id: int,
    world,
    config: SimConfig,
    visited=frozenset(),
) -> list[NeighborInfo]:
    """Neighbor rows (sorted by id) for the forwarder's weight evaluation."""
    snap = _as_snapshot(world, config)
    cur = snap.index_of[current_id]
    dst = snap.index_of[dest_id]
    candidates = _candidate_indices(snap, cur, visited)
    lets = snap.lets_from(cur)
    return [
        NeighborInfo(
            neighbor_id=int(snap.ids[i]),
            distance_to_dest=float(snap.dist[i, dst]),
            let_to_current=float(lets[i]),
            expected_backoffs=float(snap.nbar[i]),
        )
        for i in candidates
    ]


def view_maxima(view: list[NeighborInfo], config: SimConfig) -> tuple[float, float, float]:
    """(nbar_max, let_max, d_max) over a neighbor view.

    let_max is the configured clamp whenever any row never expires, so a
    permanent link always outscores a finite-lifetime one.
    """
    if not view:
        raise ValueError("view must be non-empty")
    nbar_max = max(row.expected_backoffs for row in view)
    lets = [row.let_to_current for row in view]
    let_max = config.let_clamp_s if any(math.isinf(v) for v in lets) else max(lets)
    d_max = max(row.distance_to_dest for row in view)
    return nbar_max, let_max, d_max


def _select(snap: WorldSnapshot, current_id: int, dest_id: int, visited, protocol: str) -> ForwardDecision:
    if current_id == dest_id:
        raise ValueError("current and destination must differ")
    cur = snap.index_of[current_id]
    dst = snap.index_of[dest_id]
    r = snap.config.comm_range_m
    if snap.dist[cur, dst] <= r:
        return ForwardDecision(outcome=DIRECT, next_hop=dest_id)
    candidates = _candidate_indices(snap, cur, visited)
    if candidates.size == 0:
        return ForwardDecision(outcome=NO_ROUTE)

    d_to_dest = snap.dist[candidates, dst]

    if protocol == PROTOCOL_GPSR:
        best = int(np.argmin(d_to_dest))
        if d_to_dest[best] >= snap.dist[cur, dst]:
            return ForwardDecision(outcome=NO_ROUTE)  # greedy local maximum
        return ForwardDecision(outcome=NEXT_HOP, next_hop=int(snap.ids[candidates[best]]))

    if protocol != PROTOCOL_PROPOSED:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")

    # Weigh neighbors that make forward progress when any exist; the full
    # view is only a fallback for escaping a greedy local maximum.  An
    # unrestricted view lets contention noise buy back-and-forth detours
    # whose extra transmissions cost more than they save.
    progress = d_to_dest < snap.dist[cur, dst]
    if np.any(progress):
        candidates = candidates[progress]
        d_to_dest = d_to_dest[progress]

    nbar = snap.nbar[candidates]
    lets = snap.lets_from(cur)[candidates]
    nbar_max = float(np.max(nbar))
    # A never-expiring link must outscore any finite one, so the clamp value
    # is the normalizer as soon as one infinite entry is present.
    if np.any(np.isinf(lets)):
        let_max = snap.config.let_clamp_s
    else:
        let_max = float(np.max(lets))
    d_max = float(np.max(d_to_dest))

    backoff_term = (nbar_max - nbar) / nbar_max
    if let_max > 0.0:
        let_term = np.minimum(lets, let_max) / let_max
    else:
        let_term = np.zeros_like(lets)
    if d_max > 0.0:
        dist_term = (d_max - d_to_dest) / d_max
    else:
        dist_term = np.ones_like(d_to_dest)
    weights = (
        snap.config.alpha * backoff_term
        + snap.config.beta * let_term
        + snap.config.gamma * dist_term
    )
    w_lo = float(weights.min())
    w_hi = float(weights.max())
    if w_lo < -_BOUNDS_EPS or w_hi > 1.0 + _BOUNDS_EPS:
        raise WeightContractError("computed weight outside [0, 1]")
    snap.weight_min = min(snap.weight_min, w_lo)
    snap.weight_max = max(snap.weight_max, w_hi)
    best = int(np.argmax(weights))  # first max: lowest id wins ties
    table = {int(snap.ids[candidates[i]]): float(weights[i]) for i in range(candidates.size)}
    return ForwardDecision(
        outcome=NEXT_HOP, next_hop=int(snap.ids[candidates[best]]), weight_table=table
    )


def select_next_hop_proposed(
    current_id: int, dest_id: int, world, config: SimConfig, visited=frozenset()
) -> ForwardDecision:
    """Weighted next-hop choice; deterministic lowest-id tie-breaking."""
    return _select(_as_snapshot(world, config), current_id, dest_id, visited, PROTOCOL_PROPOSED)


def select_next_hop_gpsr(
    current_id: int, dest_id: int, world, config: SimConfig, visited=frozenset()
) -> ForwardDecision:
    """Greedy baseline: nearest-to-destination neighbor with strict progress."""
    return _select(_as_snapshot(world, config), current_id, dest_id, visited, PROTOCOL_GPSR)


def discover_route(
    world,
    source_id: int,
    dest_id: int,
    config: SimConfig,
    protocol: str | None = None,
    visited=frozenset(),
    max_hops: int | None = None,
) -> tuple[list[int] | None, str | None]:
    """Chain next-hop decisions from source to destination.

    Returns (route, None) where route is the full vehicle-id path
    including both endpoints, or (None, reason) with reason one of
    ``no_route`` / ``hop_limit``.  Visited vehicles are never reused, so
    the chain cannot loop.
    """
    snap = _as_snapshot(world, config)
    protocol = protocol or config.protocol
    budget = config.hop_limit if max_hops is None else max_hops
    route = [source_id]
    seen = set(visited)
    seen.add(source_id)
    current = source_id
    while True:
        if len(route) - 1 >= budget:
            return None, "hop_limit"
        decision = _select(snap, current, dest_id, seen, protocol)
        if decision.outcome == NO_ROUTE:
            return None, "no_route"
        nxt = decision.next_hop
        route.append(nxt)
        if decision.outcome == DIRECT or nxt == dest_id:
            return route, None
        seen.add(nxt)
        current = nxt


def maintain_route(
    route,
    world,
    config: SimConfig,
    protocol: str | None = None,
) -> MaintenanceResult:
    """Walk a route after a mobility update and repair the first broken pair.

    Pairs closer than the communication range are kept; the first pair
    at or beyond it triggers re-discovery of the tail from the near-side
    vehicle.  BROKEN means the re-discovery found no replacement.
    """
    route = list(route)
    if len(route) < 2:
        raise ValueError("route must contain at least two hops")
    snap = _as_snapshot(world, config)
    r = snap.config.comm_range_m
    for k in range(len(route) - 1):
        if snap.distance(route[k], route[k + 1]) < r:
            continue
        tail, _reason = discover_route(
            snap,
            route[k],
            route[-1],
            config,
            protocol=protocol,
            visited=set(route[:k]),
            max_hops=config.hop_limit - k,
        )
        if tail is None:
            return MaintenanceResult(status=BROKEN, repaired_from=k, route=tuple(route))
        return MaintenanceResult(
            status=REPAIRED, repaired_from=k, route=tuple(route[:k] + tail)
        )
    return MaintenanceResult(status=INTACT, route=tuple(route))

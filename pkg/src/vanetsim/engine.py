"""Tick-driven simulation engine.

Each tick: advance mobility, inject Poisson packet arrivals, walk every
standing monitored route (counting and repairing broken links), then
forward every in-flight packet one hop along its route, charging the
per-hop delay ``expected_backoffs * (slot + transmit_time)``: every
failed contention round waits through one busy transmission before the
next idle slot, and the final successful round carries the packet.

Routes are discovered in full when a packet is created (chained
next-hop decisions of the configured protocol) and cached per
source/destination pair so repeat traffic reuses them.  A fixed-size
panel of those pairs is walked every maintenance pass; the broken-link
metric counts drift events on that panel, which keeps the counts
comparable across vehicle densities.  Packets whose own next link has
drifted out of range are repaired in place or dropped.

Randomness flows through three independent substreams of the root seed
(mobility, arrivals, destinations), so the packet workload never
perturbs vehicle trajectories and protocol arms can be compared on
identical worlds.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .config import SimConfig
from .mobility import VehicleState, spawn_vehicles, advance
from .routing import (
    WorldSnapshot,
    discover_route,
    maintain_route,
    INTACT,
    REPAIRED,
    BROKEN,
)

# Drop reasons.
DROP_NO_ROUTE = "no_route"
DROP_HOP_LIMIT = "hop_limit"
DROP_MAINTENANCE = "maintenance_broken"

STATUS_IN_FLIGHT = "in_flight"
STATUS_DELIVERED = "delivered"
STATUS_DROPPED = "dropped"

_STREAM_MOBILITY = 0
_STREAM_ARRIVALS = 1
_STREAM_DESTINATIONS = 2
_STREAM_MONITORED = 3

_SEED_MASK = (1 << 64) - 1


def named_stream(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible substream of a root seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed & _SEED_MASK, spawn_key=(index,)))


@dataclass
class PacketRecord:
    """Lifecycle of one packet.

    ``hops`` lists (receiving_vehicle_id, per_hop_delay_seconds) per
    transmission, so the traversed path is [source] + receivers and the
    end-to-end delay is the sum of the hop delays.
    """

    packet_id: int
    source_id: int
    dest_id: int
    created_tick: int
    hops: list[tuple[int, float]] = field(default_factory=list)
    status: str = STATUS_IN_FLIGHT
    delivered_tick: int | None = None
    drop_reason: str | None = None

    @property
    def total_delay_seconds(self) -> float:
        return sum(delay for _, delay in self.hops)

    @property
    def path(self) -> list[int]:
        return [self.source_id] + [hop for hop, _ in self.hops]


@dataclass(frozen=True)
class MetricsSummary:
    avg_end_to_end_delay_s: float  # nan when nothing was delivered
    packet_delivery_rate: float
    broken_links: int
    packets_generated: int
    packets_delivered: int
    packets_in_flight: int
    packets_dropped_by_reason: dict[str, int]

    @property
    def packets_dropped(self) -> int:
        return sum(self.packets_dropped_by_reason.values())


@dataclass(frozen=True)
class RunResult:
    config: SimConfig
    metrics: MetricsSummary
    packets: list[PacketRecord]
    weight_min: float  # extremes of every Eq-style weight computed in the run
    weight_max: float


@dataclass
class _Flight:
    record: PacketRecord
    route: list[int]
    pos: int = 0


@dataclass
class _MonitoredFlow:
    """A standing source->destination session whose route is audited.

    The flow keeps its panel slot for the whole run: when its route
    cannot be repaired it becomes routeless and retries discovery on the
    next maintenance pass, so break-count exposure does not depend on
    how much traffic the network carries.
    """

    source_id: int
    dest_id: int
    route: list[int] | None = None


def _drop(flight: _Flight, reason: str, drops: Counter) -> None:
    flight.record.status = STATUS_DROPPED
    flight.record.drop_reason = reason
    drops[reason] += 1


class _Simulation:
    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.rng_arrivals = named_stream(config.seed, _STREAM_ARRIVALS)
        self.rng_destinations = named_stream(config.seed, _STREAM_DESTINATIONS)
        self.vehicles: list[VehicleState] = spawn_vehicles(
            config, named_stream(config.seed, _STREAM_MOBILITY)
        )
        self.registry: dict[tuple[int, int], list[int]] = {}
        self.panel: list[_MonitoredFlow] = self._draw_monitored_flows(
            named_stream(config.seed, _STREAM_MONITORED)
        )
        self.packets: list[PacketRecord] = []
        self.flights: list[_Flight] = []
        self.drops: Counter = Counter()
        self.broken_links = 0
        self.delivered = 0
        self.weight_min = math.inf
        self.weight_max = -math.inf
        self._next_packet_id = 0

    # -- route bookkeeping ------------------------------------------------

    def _draw_monitored_flows(self, rng: np.random.Generator) -> list[_MonitoredFlow]:
        cfg = self.config
        n = cfg.num_vehicles
        length = cfg.road.length_m
        # Separation along the ring is invariant for co-moving pairs, so the
        # start-of-run gap is a stable notion of "long haul".
        min_gap = min(cfg.monitored_min_gap_m, 0.48 * length)
        wanted = min(cfg.monitored_routes, n * (n - 1))
        flows: list[_MonitoredFlow] = []
        seen: set[tuple[int, int]] = set()
        attempts = 0
        while len(flows) < wanted:
            attempts += 1
            src = int(rng.integers(0, n))
            dst = int(rng.integers(0, n - 1))
            if dst >= src:
                dst += 1
            if (src, dst) in seen:
                continue
            if attempts <= 200 * wanted:
                dx = abs(self.vehicles[src].x - self.vehicles[dst].x)
                if min(dx, length - dx) < min_gap:
                    continue
            seen.add((src, dst))
            flows.append(_MonitoredFlow(source_id=src, dest_id=dst))
        return flows

    def _revalidate(self, pair: tuple[int, int], snap: WorldSnapshot) -> list[int] | None:
        """Repair a cached route until intact; None when it cannot be fixed."""
        route = self.registry.get(pair)
        if route is None:
            return None
        for _ in range(self.config.hop_limit):
            result = maintain_route(route, snap, self.config)
            if result.status == INTACT:
                return route
            if result.status == BROKEN:
                self.registry.pop(pair, None)
                return None
            route = list(result.route)
            self.registry[pair] = route
        self.registry.pop(pair, None)
        return None

    def _obtain_route(self, pair: tuple[int, int], snap: WorldSnapshot):
        route = self._revalidate(pair, snap)
        if route is not None:
            return route, None
        route, reason = discover_route(snap, pair[0], pair[1], self.config)
        if route is None:
            return None, reason
        self.registry[pair] = route
        return route, None

    # -- per-tick stages ---------------------------------------------------

    def _maintain_panel(self, snap: WorldSnapshot) -> None:
        for flow in self.panel:
            repaired = None
            if flow.route is not None:
                result = maintain_route(flow.route, snap, self.config)
                if result.status == INTACT:
                    continue
                self.broken_links += 1
                if result.status == REPAIRED:
                    repaired = list(result.route)
            # A standing session re-establishes end-to-end rather than
            # splicing, so monitored routes keep their natural length; the
            # splice is the fallback.  A session that cannot be re-routed at
            # all keeps its dead route and counts one interruption per pass
            # until the network heals: that repeated re-establishment
            # overhead is what the metric measures in sparse topologies.
            route, _reason = discover_route(snap, flow.source_id, flow.dest_id, self.config)
            if route is not None:
                flow.route = route
            elif repaired is not None:
                flow.route = repaired

    def _inject_arrivals(self, tick: int, snap: WorldSnapshot) -> None:
        n = self.config.num_vehicles
        if tick >= self.config.total_ticks - self.config.drain_ticks:
            return
        rate = self.config.effective_traffic_lambda_pps * self.config.dt_s
        if rate <= 0:
            return
        counts = self.rng_arrivals.poisson(rate, n)
        for src in range(n):
            for _ in range(int(counts[src])):
                dest = int(self.rng_destinations.integers(0, n - 1))
                if dest >= src:
                    dest += 1
                record = PacketRecord(
                    packet_id=self._next_packet_id,
                    source_id=src,
                    dest_id=dest,
                    created_tick=tick,
                )
                self._next_packet_id += 1
                self.packets.append(record)
                route, reason = self._obtain_route((src, dest), snap)
                if route is None:
                    record.status = STATUS_DROPPED
                    record.drop_reason = reason
                    self.drops[reason] += 1
                    continue
                self.flights.append(_Flight(record=record, route=list(route)))

    def _forward_one_hop(self, flight: _Flight, tick: int, snap: WorldSnapshot) -> None:
        cfg = self.config
        route = flight.route
        holder = route[flight.pos]
        nxt = route[flight.pos + 1]
        hidx = snap.index_of[holder]
        attempts = 1
        dest = flight.record.dest_id
        if nxt != dest and snap.dist[hidx, snap.index_of[dest]] <= cfg.comm_range_m:
            # The destination drifted into range; hand over directly.
            flight.route = route[: flight.pos + 1] + [dest]
            route = flight.route
            nxt = dest
        elif snap.dist[hidx, snap.index_of[nxt]] >= cfg.comm_range_m:
            # The planned link drifted out of range since discovery: the
            # receiver never acknowledges, so the holder burns the full
            # retry burst before MAC failure triggers re-establishment.
            attempts += cfg.retry_limit
            budget = cfg.hop_limit - len(flight.record.hops)
            tail, _reason = discover_route(
                snap,
                holder,
                route[-1],
                cfg,
                visited=set(route[: flight.pos]),
                max_hops=budget,
            )
            if tail is None:
                _drop(flight, DROP_MAINTENANCE, self.drops)
                return
            flight.route = route[: flight.pos] + tail
            route = flight.route
            nxt = route[flight.pos + 1]
        delay = attempts * float(snap.nbar[hidx]) * (cfg.slot_s + cfg.transmit_time_s)
        flight.record.hops.append((nxt, delay))
        flight.pos += 1
        if nxt == flight.record.dest_id:
            flight.record.status = STATUS_DELIVERED
            flight.record.delivered_tick = tick
            self.delivered += 1
        elif len(flight.record.hops) >= cfg.hop_limit:
            _drop(flight, DROP_HOP_LIMIT, self.drops)

    def run(self) -> RunResult:
        cfg = self.config
        for tick in range(cfg.total_ticks):
            if tick > 0:
                self.vehicles = advance(self.vehicles, cfg.dt_s, cfg.road)
            snap = WorldSnapshot(self.vehicles, cfg)
            if tick % cfg.maintenance_interval_ticks == 0:
                self._maintain_panel(snap)
            self._inject_arrivals(tick, snap)
            still_flying = []
            for flight in self.flights:
                self._forward_one_hop(flight, tick, snap)
                if flight.record.status == STATUS_IN_FLIGHT:
                    still_flying.append(flight)
            self.flights = still_flying
            if snap.weight_max >= snap.weight_min:
                self.weight_min = min(self.weight_min, snap.weight_min)
                self.weight_max = max(self.weight_max, snap.weight_max)
        generated = len(self.packets)
        delivered_delays = [
            p.total_delay_seconds for p in self.packets if p.status == STATUS_DELIVERED
        ]
        metrics = MetricsSummary(
            avg_end_to_end_delay_s=(
                float(np.mean(delivered_delays)) if delivered_delays else math.nan
            ),
            packet_delivery_rate=(self.delivered / generated) if generated else 0.0,
            broken_links=self.broken_links,
            packets_generated=generated,
            packets_delivered=self.delivered,
            packets_in_flight=len(self.flights),
            packets_dropped_by_reason=dict(sorted(self.drops.items())),
        )
        return RunResult(
            config=cfg,
            metrics=metrics,
            packets=self.packets,
            weight_min=self.weight_min,
            weight_max=self.weight_max,
        )


def run(config: SimConfig) -> RunResult:
    """Execute one deterministic simulation run."""
    return _Simulation(config).run()


@dataclass(frozen=True)
class SweepCell:
    protocol: str
    speed_kmh: float
    num_vehicles: int
    n_seeds: int
    avg_delay_s: float
    delivery_rate: float
    broken_links: float
    packets_generated: float
    packets_delivered: float


@dataclass(frozen=True)
class SweepError:
    protocol: str
    speed_kmh: float
    num_vehicles: int
    seed: int
    message: str


def _cell_config(base: SimConfig, protocol: str, speed_kmh: float, count: int, seed: int) -> SimConfig:
    return replace(
        base,
        protocol=protocol,
        speed_min_kmh=speed_kmh,
        speed_max_kmh=speed_kmh,
        num_vehicles=count,
        seed=seed,
    )


def _run_metrics(config: SimConfig) -> MetricsSummary:
    return run(config).metrics


def sweep(
    base: SimConfig,
    vehicle_counts,
    speeds_kmh,
    protocols,
    seeds,
    max_workers: int | None = None,
) -> tuple[list[SweepCell], list[SweepError]]:
    """Cartesian grid of runs, averaged per (protocol, speed, count) cell.

    Individual run failures are collected per cell instead of aborting
    the sweep.  Results are deterministic regardless of worker count.
    """
    vehicle_counts = list(vehicle_counts)
    speeds_kmh = list(speeds_kmh)
    protocols = list(protocols)
    seeds = list(seeds)
    if not (vehicle_counts and speeds_kmh and protocols and seeds):
        raise ValueError("sweep axes must all be non-empty")

    jobs = [
        (protocol, speed, count, seed)
        for protocol in protocols
        for speed in speeds_kmh
        for count in vehicle_counts
        for seed in seeds
    ]
    configs = [_cell_config(base, *job) for job in jobs]

    outcomes: list[MetricsSummary | Exception] = [None] * len(jobs)
    if max_workers is not None and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(_run_metrics, cfg) for cfg in configs]
            for i, fut in enumerate(futures):
                try:
                    outcomes[i] = fut.result()
                except Exception as exc:  # per-cell failure, recorded below
                    outcomes[i] = exc
    else:
        for i, cfg in enumerate(configs):
            try:
                outcomes[i] = _run_metrics(cfg)
            except Exception as exc:
                outcomes[i] = exc

    cells: list[SweepCell] = []
    errors: list[SweepError] = []
    by_key: dict[tuple, list[MetricsSummary]] = {}
    for job, outcome in zip(jobs, outcomes):
        protocol, speed, count, seed = job
        if isinstance(outcome, Exception):
            errors.append(SweepError(protocol, speed, count, seed, str(outcome)))
        else:
            by_key.setdefault((protocol, speed, count), []).append(outcome)
    for protocol in protocols:
        for speed in speeds_kmh:
            for count in vehicle_counts:
                summaries = by_key.get((protocol, speed, count))
                if not summaries:
                    continue
                delays = np.array([m.avg_end_to_end_delay_s for m in summaries])
                with np.errstate(invalid="ignore"):
                    avg_delay = float(np.nanmean(delays)) if np.any(np.isfinite(delays)) else math.nan
                cells.append(
                    SweepCell(
                        protocol=protocol,
                        speed_kmh=speed,
                        num_vehicles=count,
                        n_seeds=len(summaries),
                        avg_delay_s=avg_delay,
                        delivery_rate=float(np.mean([m.packet_delivery_rate for m in summaries])),
                        broken_links=float(np.mean([m.broken_links for m in summaries])),
                        packets_generated=float(np.mean([m.packets_generated for m in summaries])),
                        packets_delivered=float(np.mean([m.packets_delivered for m in summaries])),
                    )
                )
    return cells, errors

"""Simulation configuration and the line-oriented ``key = value`` config format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

KMH_TO_MPS = 1000.0 / 3600.0

PROTOCOL_PROPOSED = "proposed"
PROTOCOL_GPSR = "gpsr"
PROTOCOLS = (PROTOCOL_PROPOSED, PROTOCOL_GPSR)


class ConfigError(ValueError):
    """Raised when a configuration value or config file is invalid."""


@dataclass(frozen=True)
class RoadConfig:
    """Geometry of the bidirectional multi-lane highway.

    Lanes are numbered across the road; the lower half heads forward
    (+x), the upper half backward (-x).  Lane centers stack upward from
    y = 0 in steps of ``lane_width_m``.
    """

    length_m: float = 1000.0
    lanes: int = 6
    lane_width_m: float = 25.0 / 6.0

    @property
    def lanes_per_direction(self) -> int:
        return self.lanes // 2

    @property
    def width_m(self) -> float:
        return self.lanes * self.lane_width_m

    def lane_center(self, lane: int) -> float:
        return (lane + 0.5) * self.lane_width_m

    def validate(self) -> None:
        if self.length_m <= 0:
            raise ConfigError("road_length_m must be > 0")
        if self.lanes < 2 or self.lanes % 2 != 0:
            raise ConfigError("lanes must be an even integer >= 2 (two directions)")
        if self.lane_width_m <= 0:
            raise ConfigError("lane_width_m must be > 0")


@dataclass(frozen=True)
class SimConfig:
    """Every tunable of a simulation run.

    Speeds are accepted in km/h at this interface and converted to m/s
    through the ``*_mps`` properties; that conversion is the only unit
    boundary in the package.  ``cw_min``/``cw_max`` are recorded for
    fidelity with the usual 802.11p parameter set but are not consumed
    by the analytic backoff model.
    """

    num_vehicles: int = 36
    speed_min_kmh: float = 30.0
    speed_max_kmh: float = 80.0
    comm_range_m: float = 250.0
    road: RoadConfig = field(default_factory=RoadConfig)
    # Per-vehicle packet arrival rate driving the contention model.
    lambda_pps: float = 10000.0
    # Rate at which discrete packets are injected per vehicle; None means
    # "same as lambda_pps".  Kept separate so the contention model can run
    # at full load while a sweep samples delay with a light packet stream.
    traffic_lambda_pps: float | None = None
    slot_s: float = 13e-6
    dt_s: float = 1e-3
    total_ticks: int = 500
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0
    protocol: str = PROTOCOL_PROPOSED
    packet_size_bytes: int = 512
    data_rate_bps: float = 6e6
    cw_min: int = 31
    cw_max: int = 1023
    # 802.11 short retry limit: a transmission toward a neighbor that left
    # range is retried this many times (never acknowledged) before the MAC
    # reports failure and the route is re-established.
    retry_limit: int = 7
    seed: int = 1
    maintenance_interval_ticks: int = 1
    let_clamp_s: float = 3600.0
    hop_limit: int = 64
    # Number of standing source->destination flows whose routes are walked
    # every maintenance pass; the broken-link counter is measured on this
    # fixed-size panel so counts are comparable across vehicle densities.
    monitored_routes: int = 10
    # Minimum start-of-run separation (along the ring) of a monitored pair.
    # Pairs inside direct range have no relay links to audit, so the panel
    # samples sessions that genuinely need multi-hop forwarding.
    monitored_min_gap_m: float = 400.0
    # Ticks before the end of the run during which no new packets are
    # injected, letting in-flight packets drain so the delivery rate is
    # not biased against longer routes by end-of-run truncation.
    drain_ticks: int = 0

    @property
    def speed_min_mps(self) -> float:
        return self.speed_min_kmh * KMH_TO_MPS

    @property
    def speed_max_mps(self) -> float:
        return self.speed_max_kmh * KMH_TO_MPS

    @property
    def speed_nominal_kmh(self) -> float:
        return 0.5 * (self.speed_min_kmh + self.speed_max_kmh)

    @property
    def effective_traffic_lambda_pps(self) -> float:
        return self.lambda_pps if self.traffic_lambda_pps is None else self.traffic_lambda_pps

    @property
    def transmit_time_s(self) -> float:
        return self.packet_size_bytes * 8.0 / self.data_rate_bps

    def validate(self) -> None:
        self.road.validate()
        if self.num_vehicles < 2:
            raise ConfigError("num_vehicles must be >= 2 (need a source/destination pair)")
        if self.speed_min_kmh < 0 or self.speed_min_kmh > self.speed_max_kmh:
            raise ConfigError("require 0 <= speed_min_kmh <= speed_max_kmh")
        if self.comm_range_m <= 0:
            raise ConfigError("comm_range_m must be > 0")
        if self.lambda_pps < 0:
            raise ConfigError("lambda_pps must be >= 0")
        if self.traffic_lambda_pps is not None and self.traffic_lambda_pps < 0:
            raise ConfigError("traffic_lambda_pps must be >= 0")
        if self.slot_s <= 0:
            raise ConfigError("slot_s must be > 0")
        if self.dt_s <= 0:
            raise ConfigError("dt_s must be > 0")
        if self.total_ticks < 1:
            raise ConfigError("total_ticks must be >= 1")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ConfigError("alpha, beta, gamma must be >= 0")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-12:
            raise ConfigError("alpha + beta + gamma must equal 1 within 1e-12")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.packet_size_bytes <= 0:
            raise ConfigError("packet_size_bytes must be > 0")
        if self.data_rate_bps <= 0:
            raise ConfigError("data_rate_bps must be > 0")
        if self.retry_limit < 0:
            raise ConfigError("retry_limit must be >= 0")
        if self.maintenance_interval_ticks < 1:
            raise ConfigError("maintenance_interval_ticks must be >= 1")
        if self.let_clamp_s <= 0:
            raise ConfigError("let_clamp_s must be > 0")
        if self.hop_limit < 1:
            raise ConfigError("hop_limit must be >= 1")
        if self.monitored_routes < 0:
            raise ConfigError("monitored_routes must be >= 0")
        if self.monitored_min_gap_m < 0:
            raise ConfigError("monitored_min_gap_m must be >= 0")
        if not (0 <= self.drain_ticks < self.total_ticks):
            raise ConfigError("drain_ticks must be in [0, total_ticks)")


# Flat config-file keys.  Road geometry is flattened into the same namespace.
_ROAD_KEYS = {
    "road_length_m": ("length_m", float),
    "lanes": ("lanes", int),
    "lane_width_m": ("lane_width_m", float),
}

_SIM_KEYS = {
    "num_vehicles": int,
    "speed_min_kmh": float,
    "speed_max_kmh": float,
    "comm_range_m": float,
    "lambda_pps": float,
    "traffic_lambda_pps": float,
    "slot_s": float,
    "dt_s": float,
    "total_ticks": int,
    "alpha": float,
    "beta": float,
    "gamma": float,
    "protocol": str,
    "packet_size_bytes": int,
    "data_rate_bps": float,
    "cw_min": int,
    "cw_max": int,
    "retry_limit": int,
    "seed": int,
    "maintenance_interval_ticks": int,
    "let_clamp_s": float,
    "hop_limit": int,
    "monitored_routes": int,
    "monitored_min_gap_m": float,
    "drain_ticks": int,
}


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: SimConfig) -> str:
    """Render a config as the line-oriented text format; round-trips exactly."""
    lines = ["# vanetsim configuration"]
    for key, (attr, _) in _ROAD_KEYS.items():
        lines.append(f"{key} = {_format_value(getattr(config.road, attr))}")
    for key in _SIM_KEYS:
        lines.append(f"{key} = {_format_value(getattr(config, key))}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str, base: SimConfig | None = None) -> SimConfig:
    """Parse ``key = value`` lines (``#`` comments) into a SimConfig.

    Unknown keys, bad types and malformed lines raise ConfigError with the
    offending line number.
    """
    config = base if base is not None else SimConfig()
    road_kwargs = {}
    sim_kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _ROAD_KEYS:
            attr, cast = _ROAD_KEYS[key]
            try:
                road_kwargs[attr] = cast(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
        elif key in _SIM_KEYS:
            cast = _SIM_KEYS[key]
            try:
                if key == "traffic_lambda_pps" and value.lower() in ("none", ""):
                    sim_kwargs[key] = None
                elif cast is str:
                    sim_kwargs[key] = value.lower()
                else:
                    sim_kwargs[key] = cast(value)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if road_kwargs:
        config = replace(config, road=replace(config.road, **road_kwargs))
    if sim_kwargs:
        config = replace(config, **sim_kwargs)
    config.validate()
    return config


def load_config(path: str, base: SimConfig | None = None) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)

import math
from dataclasses import replace

import numpy as np
import pytest

from vanetsim.config import SimConfig, RoadConfig, ConfigError
from vanetsim.engine import (
    run,
    sweep,
    named_stream,
    STATUS_DELIVERED,
    STATUS_DROPPED,
    STATUS_IN_FLIGHT,
    DROP_HOP_LIMIT,
)
from vanetsim.mobility import spawn_vehicles

from conftest import tiny_config


def test_two_vehicle_single_hop_delay():
    # Both vehicles always in range on a short road; every packet is
    # delivered directly and pays the expected contention of a two-vehicle
    # cluster, hand-computed from the closed form.
    cfg = SimConfig(
        num_vehicles=2,
        road=RoadConfig(length_m=100.0),
        speed_min_kmh=30.0,
        speed_max_kmh=30.0,
        traffic_lambda_pps=2000.0,
        total_ticks=40,
        dt_s=1e-3,
        seed=5,
    )
    result = run(cfg)
    metrics = result.metrics
    assert metrics.packets_generated > 0
    assert metrics.packets_delivered == metrics.packets_generated
    expected = (1.0 / math.exp(-2 * cfg.lambda_pps * cfg.slot_s)) * (
        cfg.slot_s + cfg.packet_size_bytes * 8 / cfg.data_rate_bps
    )
    for packet in result.packets:
        assert len(packet.hops) == 1
        assert packet.total_delay_seconds == pytest.approx(expected, rel=1e-12)
    assert metrics.avg_end_to_end_delay_s == pytest.approx(expected, rel=1e-9)


def test_zero_workload():
    cfg = tiny_config(traffic_lambda_pps=0.0)
    metrics = run(cfg).metrics
    assert metrics.packets_generated == 0
    assert metrics.packet_delivery_rate == 0.0
    assert math.isnan(metrics.avg_end_to_end_delay_s)


def test_identical_seed_identical_results():
    cfg = tiny_config(seed=123)
    a = run(cfg)
    b = run(cfg)
    assert a.metrics == b.metrics
    assert [(p.packet_id, p.status, p.hops) for p in a.packets] == [
        (p.packet_id, p.status, p.hops) for p in b.packets
    ]


def test_conservation_on_random_configs():
    for seed in range(6):
        cfg = tiny_config(seed=seed, num_vehicles=10 + seed, drain_ticks=0)
        metrics = run(cfg).metrics
        in_flight = sum(1 for _ in [])  # placeholder for readability
        assert metrics.packets_generated == (
            metrics.packets_delivered + metrics.packets_dropped + metrics.packets_in_flight
        )


def test_workload_never_perturbs_mobility():
    # Identical spawn regardless of the packet stream: the named substreams
    # keep the arms paired.
    cfg_light = tiny_config(traffic_lambda_pps=0.05)
    cfg_heavy = tiny_config(traffic_lambda_pps=2.0)
    spawn_a = spawn_vehicles(cfg_light, named_stream(cfg_light.seed, 0))
    spawn_b = spawn_vehicles(cfg_heavy, named_stream(cfg_heavy.seed, 0))
    assert spawn_a == spawn_b
    a = run(cfg_light).metrics.broken_links
    b = run(cfg_heavy).metrics.broken_links
    assert a == b  # panel flows never see the traffic


def test_drain_window_stops_injection():
    cfg = tiny_config(drain_ticks=20)
    result = run(cfg)
    assert result.packets, "expected some traffic"
    assert max(p.created_tick for p in result.packets) < cfg.total_ticks - cfg.drain_ticks


def test_hop_limit_drops():
    # A three-hop chain with a one-hop budget cannot route anything.
    cfg = tiny_config(num_vehicles=4, hop_limit=1, traffic_lambda_pps=0.5)
    cfg = replace(cfg, road=RoadConfig(length_m=900.0), monitored_routes=0)
    result = run(cfg)
    reasons = result.metrics.packets_dropped_by_reason
    multi_hop_drops = reasons.get(DROP_HOP_LIMIT, 0) + reasons.get("no_route", 0)
    assert multi_hop_drops == sum(
        1 for p in result.packets if p.status == STATUS_DROPPED and not p.hops
    )


def test_weight_bounds_audited():
    result = run(tiny_config(seed=3))
    if result.weight_max >= result.weight_min:  # some weighted decision ran
        assert result.weight_min >= -1e-12
        assert result.weight_max <= 1.0 + 1e-12


def test_delivered_packets_end_at_destination():
    result = run(tiny_config(seed=11, num_vehicles=16))
    delivered = [p for p in result.packets if p.status == STATUS_DELIVERED]
    assert delivered
    for p in delivered:
        assert p.hops[-1][0] == p.dest_id
        assert len(p.hops) <= result.config.hop_limit
        assert p.total_delay_seconds > 0.0
        # No vehicle appears twice in a path.
        path = p.path
        assert len(path) == len(set(path))


def test_sweep_grid_shape_and_averaging():
    base = tiny_config(total_ticks=30)
    cells, errors = sweep(base, [8, 12], [30.0, 80.0], ["proposed", "gpsr"], [0, 1])
    assert not errors
    assert len(cells) == 8
    assert {c.n_seeds for c in cells} == {2}


def test_sweep_single_cell_equals_direct_run():
    base = tiny_config(total_ticks=30)
    cells, _ = sweep(base, [10], [50.0], ["proposed"], [4])
    cell = cells[0]
    direct = run(
        replace(base, num_vehicles=10, speed_min_kmh=50.0, speed_max_kmh=50.0, protocol="proposed", seed=4)
    ).metrics
    assert cell.delivery_rate == pytest.approx(direct.packet_delivery_rate)
    assert cell.broken_links == pytest.approx(direct.broken_links)


def test_sweep_repeated_seed_is_idempotent():
    base = tiny_config(total_ticks=30)
    one, _ = sweep(base, [10], [50.0], ["proposed"], [4])
    two, _ = sweep(base, [10], [50.0], ["proposed"], [4, 4])
    assert one[0].avg_delay_s == pytest.approx(two[0].avg_delay_s, rel=1e-12)
    assert one[0].delivery_rate == pytest.approx(two[0].delivery_rate, rel=1e-12)


def test_sweep_records_per_cell_failures():
    base = tiny_config(total_ticks=30)
    cells, errors = sweep(base, [1, 10], [50.0], ["proposed"], [0])
    assert len(cells) == 1  # the valid cell survived
    assert len(errors) == 1
    assert errors[0].num_vehicles == 1


def test_sweep_rejects_empty_axes():
    with pytest.raises(ValueError):
        sweep(tiny_config(), [], [30.0], ["proposed"], [0])


def test_sweep_parallel_matches_sequential():
    base = tiny_config(total_ticks=30)
    seq, seq_err = sweep(base, [8, 10], [50.0], ["proposed"], [0, 1])
    par, par_err = sweep(base, [8, 10], [50.0], ["proposed"], [0, 1], max_workers=2)
    assert seq == par
    assert seq_err == par_err


def test_run_validates_config():
    with pytest.raises(ConfigError):
        run(SimConfig(num_vehicles=1))

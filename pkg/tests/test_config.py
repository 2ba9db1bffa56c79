import pytest

from vanetsim.config import SimConfig, ConfigError, dump_config, parse_config_text


def test_defaults_validate():
    SimConfig().validate()


def test_dump_parse_round_trip():
    cfg = SimConfig(num_vehicles=24, seed=99, speed_min_kmh=30.0, speed_max_kmh=30.0)
    text = dump_config(cfg)
    parsed = parse_config_text(text)
    assert parsed == cfg
    assert dump_config(parsed) == text


def test_parse_reports_line_numbers():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("num_vehicles = 12\nnot a key value\n")
    with pytest.raises(ConfigError, match="line 1.*bogus"):
        parse_config_text("bogus = 3\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("num_vehicles = twelve\n")


def test_parse_comments_and_blank_lines():
    cfg = parse_config_text("# comment\n\nnum_vehicles = 18  # trailing\n")
    assert cfg.num_vehicles == 18


def test_traffic_lambda_none_round_trip():
    cfg = parse_config_text("traffic_lambda_pps = none\n")
    assert cfg.traffic_lambda_pps is None
    assert cfg.effective_traffic_lambda_pps == cfg.lambda_pps
    cfg2 = parse_config_text("traffic_lambda_pps = 5.0\n")
    assert cfg2.effective_traffic_lambda_pps == 5.0


def test_speed_conversion_is_the_unit_boundary():
    cfg = SimConfig(speed_min_kmh=30.0, speed_max_kmh=30.0)
    assert cfg.speed_min_mps == pytest.approx(8.3333333333, abs=1e-9)


@pytest.mark.parametrize(
    "overrides",
    [
        dict(num_vehicles=1),
        dict(speed_min_kmh=60.0, speed_max_kmh=30.0),
        dict(alpha=0.5, beta=0.5, gamma=0.5),
        dict(alpha=-0.1, beta=0.6, gamma=0.5),
        dict(protocol="flooding"),
        dict(total_ticks=0),
        dict(dt_s=0.0),
        dict(hop_limit=0),
        dict(drain_ticks=500),
        dict(retry_limit=-1),
    ],
)
def test_validation_rejects(overrides):
    with pytest.raises(ConfigError):
        SimConfig(**overrides).validate()


def test_road_invariants():
    from vanetsim.config import RoadConfig

    with pytest.raises(ConfigError):
        RoadConfig(lanes=5).validate()
    road = RoadConfig()
    assert road.lanes == 2 * road.lanes_per_direction
    assert road.width_m == pytest.approx(25.0)
    assert road.lane_center(0) == pytest.approx(25.0 / 12.0)

"""Command-line front end: single runs, parameter sweeps and calculators.

Outputs are plain CSV with fixed headers (documented in the README) so
plotting scripts can rely on them byte-for-byte.  All numeric output is
in SI units; speeds are km/h only at the configuration interface.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import replace

from .config import (
    SimConfig,
    ConfigError,
    load_config,
    dump_config,
    PROTOCOLS,
)
from .engine import run, sweep
from .linkmodel import link_expiration
from .macmodel import ClusterStats, expected_backoffs
from .mobility import Heading, VehicleState
from .routing import NeighborInfo, weight

METRICS_HEADER = [
    "protocol",
    "num_vehicles",
    "speed_kmh",
    "seed",
    "avg_delay_s",
    "delivery_rate",
    "broken_links",
    "packets_generated",
    "packets_delivered",
]

TRACE_HEADER = [
    "packet_id",
    "source_id",
    "dest_id",
    "created_tick",
    "status",
    "hop_index",
    "vehicle_id",
    "per_hop_delay_s",
]

SWEEP_HEADER = [
    "protocol",
    "num_vehicles",
    "speed_kmh",
    "n_seeds",
    "avg_delay_s",
    "delivery_rate",
    "broken_links",
    "packets_generated",
    "packets_delivered",
]

ERRORS_HEADER = ["protocol", "num_vehicles", "speed_kmh", "seed", "error"]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, header: list[str], rows, force: bool) -> None:
    if os.path.exists(path) and not force:
        raise CliError(f"refusing to overwrite {path} (use --force)", EXIT_USAGE)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _load_base_config(args) -> SimConfig:
    cfg = SimConfig()
    if args.config is not None:
        if not os.path.exists(args.config):
            raise CliError(f"config file not found: {args.config}", EXIT_USAGE)
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            raise CliError(f"config error in {args.config}: {exc}", EXIT_USAGE)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    try:
        cfg.validate()
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    return cfg


def _parse_list(raw: str, cast, flag: str) -> list:
    try:
        values = [cast(item.strip()) for item in raw.split(",") if item.strip()]
    except ValueError as exc:
        raise CliError(f"{flag}: {exc}", EXIT_USAGE)
    if not values:
        raise CliError(f"{flag} must list at least one value", EXIT_USAGE)
    return values


def _parse_heading(token: str) -> Heading:
    t = token.strip().lower()
    if t in ("f", "forward", "1", "+1"):
        return Heading.FORWARD
    if t in ("b", "backward", "-1"):
        return Heading.BACKWARD
    raise CliError(f"bad heading {token!r}: expected f/forward or b/backward", EXIT_USAGE)


def _parse_float(token: str, name: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise CliError(f"bad {name} value {token!r}", EXIT_USAGE)


# -- subcommands ------------------------------------------------------------


def _cmd_run(args) -> int:
    cfg = _load_base_config(args)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    try:
        result = run(cfg)
    except Exception as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    metrics = result.metrics
    os.makedirs(args.out, exist_ok=True)
    metrics_row = [
        cfg.protocol,
        cfg.num_vehicles,
        cfg.speed_nominal_kmh,
        cfg.seed,
        metrics.avg_end_to_end_delay_s,
        metrics.packet_delivery_rate,
        metrics.broken_links,
        metrics.packets_generated,
        metrics.packets_delivered,
    ]
    trace_rows = []
    for packet in result.packets:
        for hop_index, (vehicle_id, delay) in enumerate(packet.hops):
            trace_rows.append(
                [
                    packet.packet_id,
                    packet.source_id,
                    packet.dest_id,
                    packet.created_tick,
                    packet.status,
                    hop_index,
                    vehicle_id,
                    delay,
                ]
            )
    _write_csv(os.path.join(args.out, "metrics.csv"), METRICS_HEADER, [metrics_row], args.force)
    _write_csv(os.path.join(args.out, "trace.csv"), TRACE_HEADER, trace_rows, args.force)

    print(f"protocol            : {cfg.protocol}")
    print(f"vehicles            : {cfg.num_vehicles}")
    print(f"speed (km/h)        : {cfg.speed_min_kmh:g}..{cfg.speed_max_kmh:g}")
    print(f"seed                : {cfg.seed}")
    print(f"packets generated   : {metrics.packets_generated}")
    print(f"packets delivered   : {metrics.packets_delivered}")
    if math.isnan(metrics.avg_end_to_end_delay_s):
        print("avg delay (s)       : n/a (nothing delivered)")
    else:
        print(f"avg delay (s)       : {metrics.avg_end_to_end_delay_s:.9g}")
    print(f"delivery rate       : {metrics.packet_delivery_rate:.6f}")
    print(f"broken links        : {metrics.broken_links}")
    for reason, count in metrics.packets_dropped_by_reason.items():
        print(f"dropped [{reason:<18}]: {count}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_base_config(args)
    vehicles = _parse_list(args.vehicles, int, "--vehicles")
    speeds = _parse_list(args.speeds, float, "--speeds")
    protocols = _parse_list(args.protocols, str, "--protocols")
    seeds = _parse_list(args.seeds, int, "--seeds")
    for protocol in protocols:
        if protocol not in PROTOCOLS:
            raise CliError(f"unknown protocol {protocol!r}", EXIT_USAGE)

    workers = None
    raw_threads = os.environ.get("VANETSIM_THREADS")
    if raw_threads:
        try:
            workers = max(1, int(raw_threads))
        except ValueError:
            raise CliError(f"VANETSIM_THREADS must be an integer, got {raw_threads!r}", EXIT_USAGE)

    try:
        cells, errors = sweep(cfg, vehicles, speeds, protocols, seeds, max_workers=workers)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)

    os.makedirs(args.out, exist_ok=True)
    sweep_rows = [
        [
            c.protocol,
            c.num_vehicles,
            c.speed_kmh,
            c.n_seeds,
            c.avg_delay_s,
            c.delivery_rate,
            c.broken_links,
            c.packets_generated,
            c.packets_delivered,
        ]
        for c in cells
    ]
    fig_delay = [[c.protocol, c.speed_kmh, c.num_vehicles, c.avg_delay_s] for c in cells]
    fig_pdr = [[c.protocol, c.speed_kmh, c.num_vehicles, c.delivery_rate] for c in cells]
    fig_broken = [[c.protocol, c.speed_kmh, c.num_vehicles, c.broken_links] for c in cells]
    error_rows = [[e.protocol, e.num_vehicles, e.speed_kmh, e.seed, e.message] for e in errors]

    _write_csv(os.path.join(args.out, "sweep.csv"), SWEEP_HEADER, sweep_rows, args.force)
    _write_csv(
        os.path.join(args.out, "fig_delay.csv"),
        ["protocol", "speed_kmh", "num_vehicles", "avg_delay_s"],
        fig_delay,
        args.force,
    )
    _write_csv(
        os.path.join(args.out, "fig_pdr.csv"),
        ["protocol", "speed_kmh", "num_vehicles", "delivery_rate"],
        fig_pdr,
        args.force,
    )
    _write_csv(
        os.path.join(args.out, "fig_broken.csv"),
        ["protocol", "speed_kmh", "num_vehicles", "broken_links"],
        fig_broken,
        args.force,
    )
    _write_csv(os.path.join(args.out, "errors.csv"), ERRORS_HEADER, error_rows, args.force)

    print(f"sweep cells written : {len(cells)}")
    print(f"run failures        : {len(error_rows)}")
    return EXIT_OK if cells else EXIT_RUNTIME


def _cmd_calc(args) -> int:
    tokens = args.values
    if args.calculator == "backoff":
        if len(tokens) != 3:
            raise CliError("usage: calc backoff CLUSTER_SIZE LAMBDA_PPS SLOT_S", EXIT_USAGE)
        try:
            stats = ClusterStats(
                cluster_size=int(tokens[0]),
                lambda_per_vehicle=_parse_float(tokens[1], "lambda"),
                slot_seconds=_parse_float(tokens[2], "slot"),
            )
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
        print(repr(expected_backoffs(stats).expected_backoffs))
        return EXIT_OK

    if args.calculator == "let":
        if len(tokens) != 9:
            raise CliError(
                "usage: calc let X1 Y1 SPEED1 HEADING1 X2 Y2 SPEED2 HEADING2 RANGE_M",
                EXIT_USAGE,
            )
        a = VehicleState(
            id=0,
            x=_parse_float(tokens[0], "x1"),
            y=_parse_float(tokens[1], "y1"),
            speed=_parse_float(tokens[2], "speed1"),
            heading=_parse_heading(tokens[3]),
            lane=0,
        )
        b = VehicleState(
            id=1,
            x=_parse_float(tokens[4], "x2"),
            y=_parse_float(tokens[5], "y2"),
            speed=_parse_float(tokens[6], "speed2"),
            heading=_parse_heading(tokens[7]),
            lane=0,
        )
        r = _parse_float(tokens[8], "range")
        estimate = link_expiration(a, b, r)
        if not estimate.in_range:
            print("pair out of range: no link to expire", file=sys.stderr)
            return EXIT_RUNTIME
        print(repr(estimate.let_seconds))
        return EXIT_OK

    if args.calculator == "weight":
        if len(tokens) != 9:
            raise CliError(
                "usage: calc weight NBAR NBAR_MAX LET_S LET_MAX_S DIST_M DIST_MAX_M ALPHA BETA GAMMA",
                EXIT_USAGE,
            )
        values = [
            math.inf if t.strip().lower() in ("inf", "infinite") else _parse_float(t, "weight arg")
            for t in tokens
        ]
        nbar, nbar_max, let_s, let_max, dist, dist_max, alpha, beta, gamma = values
        info = NeighborInfo(
            neighbor_id=0,
            distance_to_dest=dist,
            let_to_current=let_s,
            expected_backoffs=nbar,
        )
        try:
            value = weight(info, nbar_max, let_max, dist_max, alpha, beta, gamma)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
        print(repr(value))
        return EXIT_OK

    raise CliError(f"unknown calculator {args.calculator!r}", EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vanetsim",
        description="Deterministic highway VANET routing simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation and write metrics.csv / trace.csv")
    p_run.add_argument("--config", help="path to a key = value config file")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--seed", type=int, help="override the root seed")
    p_run.add_argument("--force", action="store_true", help="overwrite existing output files")
    p_run.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective config and exit without running",
    )
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of runs averaged per cell, plus figure CSVs")
    p_sweep.add_argument("--config", help="base config file for every cell")
    p_sweep.add_argument("--out", default="out", help="output directory (default: out)")
    p_sweep.add_argument("--force", action="store_true", help="overwrite existing output files")
    p_sweep.add_argument("--vehicles", default="12,24,36,48,60", help="comma list of vehicle counts")
    p_sweep.add_argument("--speeds", default="30,80", help="comma list of speeds in km/h")
    p_sweep.add_argument("--protocols", default="proposed,gpsr", help="comma list of protocols")
    p_sweep.add_argument(
        "--seeds",
        default=",".join(str(s) for s in range(20)),
        help="comma list of seeds (default: 0..19)",
    )
    p_sweep.set_defaults(func=_cmd_sweep)

    p_calc = sub.add_parser("calc", help="evaluate the analytic calculators")
    p_calc.add_argument("calculator", choices=("let", "backoff", "weight"))
    p_calc.add_argument("values", nargs="*", help="numeric arguments for the calculator")
    p_calc.set_defaults(func=_cmd_calc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: simulator, batch pipeline, and server.

Exit codes: 0 success, 1 validation or configuration problem, 2 IO
problem (missing files, unwritable paths), 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from datetime import date
from pathlib import Path

from . import pipeline
from .config import AppConfig, load_config
from .errors import (
    ConfigurationError,
    ContractViolation,
    EmptyDatasetError,
    EnrichmentUnavailableError,
    SchedulingError,
    ValidationError,
)
from .simulate import CohortSpec, PlantedEdge, simulate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _parse_edge(text: str) -> PlantedEdge:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigurationError(
            f"--edge expects SUBJECT:FRIEND:EFFECT[:RATE], got {text!r}"
        )
    try:
        effect = int(parts[2])
        rate = float(parts[3]) if len(parts) == 4 else 0.5
    except ValueError as exc:
        raise ConfigurationError(f"bad --edge numbers in {text!r}: {exc}") from exc
    return PlantedEdge(subject=parts[0], friend=parts[1], effect=effect,
                       copresence_rate=rate)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="happimeter",
        description="Mood sensing platform: simulator, training pipeline, server.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic cohort bundle")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--users", type=int, default=20)
    sim.add_argument("--days", type=int, default=30)
    sim.add_argument("--noise", type=float, default=0.1)
    sim.add_argument("--rule", default="weather-hour")
    sim.add_argument("--start", default="2017-05-01", help="first cohort day (ISO date)")
    sim.add_argument("--temp-min", type=float, default=8.0)
    sim.add_argument("--temp-max", type=float, default=28.0)
    sim.add_argument(
        "--edge", action="append", default=[],
        metavar="SUBJECT:FRIEND:EFFECT[:RATE]",
        help="planted influence edge, repeatable (e.g. u01:u02:1:0.5)",
    )

    def add_pipeline_args(p: argparse.ArgumentParser, *, folds: bool = False,
                          seeded: bool = False, vmc: bool = False,
                          targeted: bool = False) -> None:
        p.add_argument("--input", required=True, help="cohort bundle directory")
        p.add_argument("--out", required=True, help="report output directory")
        p.add_argument("--config", default=None, help="JSON config file")
        if targeted:
            p.add_argument(
                "--target", default="all",
                choices=("pleasance", "activation", "mood_state", "all"),
            )
        if folds:
            p.add_argument("--folds", type=int, default=10)
        if seeded:
            p.add_argument("--seed", type=int, default=None,
                           help="forest seed override (defaults to config)")
            p.add_argument("--n-jobs", type=int, default=1)
        if vmc:
            p.add_argument("--vmc-window-hours", type=float, default=None,
                           help="recompute the windowed-VMC column for table3")

    add_pipeline_args(
        sub.add_parser("train", help="train general models"),
        seeded=True, targeted=True,
    )
    add_pipeline_args(
        sub.add_parser("evaluate", help="cross-validate and write table4.csv"),
        folds=True, seeded=True, targeted=True,
    )
    add_pipeline_args(
        sub.add_parser("importance", help="write fig7.csv and fig8.csv"),
        seeded=True, targeted=True,
    )
    add_pipeline_args(
        sub.add_parser("correlate", help="write table3.csv"), vmc=True
    )
    add_pipeline_args(sub.add_parser("influence", help="write influence.csv"))
    add_pipeline_args(
        sub.add_parser("report", help="write the full report battery"),
        folds=True, seeded=True, vmc=True,
    )

    srv = sub.add_parser("serve", help="run the HTTP server")
    srv.add_argument("--config", default=None, help="JSON config file")
    srv.add_argument("--port", type=int, default=None, help="override config port")
    srv.add_argument("--host", default="127.0.0.1")

    return parser


def _config_for(args: argparse.Namespace) -> AppConfig:
    return load_config(getattr(args, "config", None))


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        spec = CohortSpec(
            seed=args.seed,
            n_users=args.users,
            n_days=args.days,
            rule=args.rule,
            noise=args.noise,
            start=date.fromisoformat(args.start),
            temp_range=(args.temp_min, args.temp_max),
            edges=tuple(_parse_edge(e) for e in args.edge),
        )
        truth = simulate(spec, args.out)
        print(
            f"wrote {truth.n_sensor_rows} sensor rows, {truth.n_mood_rows} moods, "
            f"{truth.n_weather_rows} weather rows to {args.out}"
        )
        return EXIT_OK

    if args.command == "train":
        cfg = _config_for(args)
        paths = pipeline.run_train(
            args.input, args.out, cfg, seed=args.seed, n_jobs=args.n_jobs,
            target=args.target,
        )
        for path in paths:
            print(f"wrote {path}")
        return EXIT_OK

    if args.command == "evaluate":
        cfg = _config_for(args)
        path = pipeline.run_evaluate(
            args.input, args.out, cfg, folds=args.folds, seed=args.seed,
            n_jobs=args.n_jobs, target=args.target,
        )
        print(f"wrote {path}")
        return EXIT_OK

    if args.command == "importance":
        cfg = _config_for(args)
        for path in pipeline.run_importance(
            args.input, args.out, cfg, seed=args.seed, n_jobs=args.n_jobs,
            target=args.target,
        ):
            print(f"wrote {path}")
        return EXIT_OK

    if args.command == "correlate":
        cfg = _config_for(args)
        path = pipeline.run_correlate(
            args.input, args.out, cfg, vmc_window_hours=args.vmc_window_hours
        )
        print(f"wrote {path}")
        return EXIT_OK

    if args.command == "influence":
        cfg = _config_for(args)
        path = pipeline.run_influence(args.input, args.out, cfg)
        print(f"wrote {path}")
        return EXIT_OK

    if args.command == "report":
        cfg = _config_for(args)
        for path in pipeline.run_report(
            args.input, args.out, cfg, folds=args.folds, seed=args.seed,
            n_jobs=args.n_jobs, vmc_window_hours=args.vmc_window_hours,
        ):
            print(f"wrote {path}")
        return EXIT_OK

    if args.command == "serve":
        from .server import run_server

        cfg = _config_for(args)
        if args.port is not None:
            from dataclasses import replace

            cfg = replace(cfg, port=args.port)
        run_server(cfg, host=args.host)
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ValidationError, ConfigurationError, SchedulingError,
            EmptyDatasetError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FileNotFoundError, PermissionError, IsADirectoryError,
            EnrichmentUnavailableError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Broker entry point: `sembus-broker --ontology demo.json --port 8080`."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

import uvicorn

from ..precision import DEFAULT_MAX_PASSES, SEMANTIC_DEFAULT, PrecisionConfig
from .config import BrokerConfig, Mode
from .core import Broker
from .http import create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sembus-broker",
        description="Content-based pub/sub broker with semantic matching.")
    parser.add_argument("--ontology", action="append", default=[],
                        metavar="PATH",
                        help="ontology JSON file; repeat for multiple domains")
    parser.add_argument("--mode", choices=["semantic", "syntactic"],
                        default="semantic")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080)
    parser.add_argument("--current-year", type=int, default=None,
                        help="year used to resolve open-ended ranges and "
                             "mapping arithmetic (default: this year)")
    parser.add_argument("--data-dir", type=Path, default=None,
                        help="persistence directory (default: in-memory only)")
    parser.add_argument("--max-passes", type=int, default=DEFAULT_MAX_PASSES,
                        help="fixpoint iteration bound for event expansion")
    parser.add_argument("--max-generality", type=int, default=None,
                        help="default hop cap for hierarchy generalization")
    parser.add_argument("--admin-token", default="",
                        help="shared token required for /admin endpoints")
    parser.add_argument("--log-level", default="warning")
    return parser


def config_from_args(args: argparse.Namespace) -> BrokerConfig:
    precision = PrecisionConfig(stages=SEMANTIC_DEFAULT.stages,
                                max_generality=args.max_generality,
                                max_passes=args.max_passes)
    kwargs = dict(
        mode=Mode(args.mode),
        default_precision=precision,
        ontology_paths=tuple(args.ontology),
        data_dir=args.data_dir,
        host=args.host,
        port=args.port,
        admin_token=args.admin_token,
    )
    if args.current_year is not None:
        kwargs["current_year"] = args.current_year
    return BrokerConfig(**kwargs)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper())
    config = config_from_args(args)
    broker = Broker(config)
    app = create_app(broker)
    try:
        uvicorn.run(app, host=config.host, port=config.port,
                    log_level=args.log_level)
    finally:
        broker.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

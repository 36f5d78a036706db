"""Workload CLI: `sembus-workload gen ...` and `sembus-workload drive ...`."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from ..ontology import load_ontology_files
from .domain import DomainSpec
from .drive import drive
from .generate import generate, write_streams


def _default_spec() -> DomainSpec:
    text = resources.files("sembus").joinpath(
        "data/workload_spec.json").read_text()
    return DomainSpec.from_json(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sembus-workload",
        description="Generate seeded pub/sub workloads and drive a broker.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write deterministic workload streams")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--subs", type=int, default=100)
    gen.add_argument("--pubs", type=int, default=100)
    gen.add_argument("--spec", type=Path, default=None,
                     help="DomainSpec JSON (default: packaged demo spec)")
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--ontology", action="append", default=[],
                     metavar="PATH",
                     help="report spec terms unknown to these ontologies")

    drv = sub.add_parser("drive", help="replay streams against a broker")
    drv.add_argument("--broker", required=True, metavar="URL")
    drv.add_argument("--rate", type=float, default=0.0,
                     help="publications per second (0: unpaced)")
    drv.add_argument("--concurrency", type=int, default=4)
    drv.add_argument("--in", dest="in_dir", type=Path, required=True)
    drv.add_argument("--report", type=Path, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "gen":
        spec = DomainSpec.from_file(args.spec) if args.spec else _default_spec()
        if args.ontology:
            novel = spec.novel_terms(load_ontology_files(args.ontology))
            if novel:
                print(f"novel terms (absent from ontology): {', '.join(novel)}",
                      file=sys.stderr)
        subs, events, stats = generate(args.seed, args.subs, args.pubs, spec)
        write_streams(args.out, subs, events, stats)
        print(json.dumps(stats, sort_keys=True))
        return 0
    report = drive(args.broker, args.rate, args.concurrency, args.in_dir,
                   args.report)
    print(json.dumps(report, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

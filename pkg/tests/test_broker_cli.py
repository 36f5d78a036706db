"""Broker command line: argument mapping and a real server subprocess."""

from __future__ import annotations

import subprocess
import sys

import httpx

from sembus.broker.cli import build_parser, config_from_args
from sembus.broker.config import Mode
from sembus.pipeline import Stage

from .conftest import DEMO_YEAR, JOB_ONTOLOGY_PATH, free_port, wait_ready


def test_args_map_to_config(tmp_path):
    args = build_parser().parse_args([
        "--ontology", str(JOB_ONTOLOGY_PATH), "--mode", "syntactic",
        "--port", "9100", "--current-year", "2003",
        "--data-dir", str(tmp_path), "--max-passes", "6",
        "--max-generality", "2", "--admin-token", "t"])
    cfg = config_from_args(args)
    assert cfg.mode is Mode.SYNTACTIC
    assert cfg.ontology_paths == (str(JOB_ONTOLOGY_PATH),)
    assert cfg.current_year == 2003
    assert cfg.port == 9100 and cfg.data_dir == tmp_path
    assert cfg.admin_token == "t"
    assert cfg.default_precision.max_passes == 6
    assert cfg.default_precision.max_generality == 2
    assert cfg.default_precision.stages == frozenset(
        {Stage.SYNONYM, Stage.HIERARCHY, Stage.MAPPING})


def test_defaults_leave_year_to_clock():
    cfg = config_from_args(build_parser().parse_args([]))
    assert cfg.mode is Mode.SEMANTIC
    assert cfg.current_year >= 2026
    assert cfg.data_dir is None


def test_server_subprocess_serves_requests():
    port = free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "sembus.broker.cli",
         "--ontology", str(JOB_ONTOLOGY_PATH),
         "--port", str(port), "--current-year", str(DEMO_YEAR)],
        stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    base = f"http://127.0.0.1:{port}"
    try:
        wait_ready(base)
        status = httpx.get(f"{base}/status").json()
        assert status["mode"] == "semantic"
        assert status["current_year"] == DEMO_YEAR
        assert status["ontology"]["domains"] == ["job-finder"]
    finally:
        proc.terminate()
        proc.wait(timeout=10)

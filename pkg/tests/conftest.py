"""Shared fixtures: packaged demo ontologies, golden documents, a live
uvicorn server factory, and a local webhook sink."""

from __future__ import annotations

import socket
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from importlib import resources
from pathlib import Path

import httpx
import pytest
import uvicorn

from sembus.broker import Broker
from sembus.broker.http import create_app
from sembus.ontology import Ontology, load_ontology_files

DATA_DIR = Path(str(resources.files("sembus").joinpath("data")))
JOB_ONTOLOGY_PATH = DATA_DIR / "job_finder_ontology.json"
VEHICLES_ONTOLOGY_PATH = DATA_DIR / "vehicles_ontology.json"
WORKLOAD_SPEC_PATH = DATA_DIR / "workload_spec.json"

DEMO_YEAR = 2003

# Recruiter subscription and the two candidate resumes used across suites.
RECRUITER_SUB = {
    "sub_id": "S",
    "predicates": [
        ["university", "=", "Toronto"],
        ["degree", "=", "PhD"],
        ["professional experience", ">=", 4],
    ],
}

CANDIDATE_EVENT = {
    "event_id": "E",
    "pairs": [
        ["school", "Toronto"],
        ["degree", "PhD"],
        ["work experience", True],
        ["graduation year", 1990],
    ],
}

RESUME_EVENT = {
    "event_id": "E2",
    "pairs": [
        ["school", "Toronto"],
        ["graduation year", 1993],
        ["job1", "IBM"],
        ["period", "1994-1997"],
        ["job2", "Microsoft"],
        ["period", "1999-present"],
    ],
}


@pytest.fixture(scope="session")
def job_ontology() -> Ontology:
    return load_ontology_files([JOB_ONTOLOGY_PATH])


@pytest.fixture(scope="session")
def vehicles_ontology() -> Ontology:
    return load_ontology_files([VEHICLES_ONTOLOGY_PATH])


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def wait_ready(base_url: str, timeout: float = 10.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            httpx.get(f"{base_url}/status", timeout=0.5)
            return
        except httpx.HTTPError:
            time.sleep(0.05)
    raise RuntimeError(f"server at {base_url} never became ready")


@pytest.fixture
def serve():
    """Factory running a Broker behind uvicorn; returns its base URL."""
    running: list[tuple[uvicorn.Server, threading.Thread, Broker]] = []

    def start(broker: Broker) -> str:
        port = free_port()
        config = uvicorn.Config(create_app(broker), host="127.0.0.1",
                                port=port, log_level="error")
        server = uvicorn.Server(config)
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        base_url = f"http://127.0.0.1:{port}"
        wait_ready(base_url)
        running.append((server, thread, broker))
        return base_url

    yield start
    for server, thread, broker in running:
        server.should_exit = True
        thread.join(timeout=5)
        broker.close()


class _SinkHandler(BaseHTTPRequestHandler):
    def do_POST(self):  # noqa: N802 (http.server API)
        length = int(self.headers.get("content-length", 0))
        body = self.rfile.read(length)
        self.server.received.append(body)
        self.send_response(200)
        self.end_headers()

    def log_message(self, *args):
        pass


@pytest.fixture
def webhook_sink():
    """(url, received bodies) of a local HTTP sink accepting every POST."""
    server = ThreadingHTTPServer(("127.0.0.1", 0), _SinkHandler)
    server.received = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{server.server_address[1]}/hook"
    yield url, server.received
    server.shutdown()
    thread.join(timeout=5)

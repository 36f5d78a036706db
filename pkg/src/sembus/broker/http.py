"""HTTP/JSON front end for the broker.

Request bodies are decoded with Decimal floats so numeric values keep exact
comparisons all the way into the index; responses are canonical JSON. The
stream endpoint speaks server-sent events and the queue endpoint drains on
read.
"""

from __future__ import annotations

import json
import queue
from decimal import Decimal

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse

from ..matcher import DuplicateSubscription
from ..model import ParseError, canonical_json
from .core import Broker, UnknownClient

STREAM_KEEPALIVE_SECONDS = 15.0


def _json_response(payload, status: int = 200) -> Response:
    return Response(content=canonical_json(payload), status_code=status,
                    media_type="application/json")


def _error(message: str, status: int) -> Response:
    return _json_response({"error": message}, status)


async def _body(request: Request) -> dict:
    raw = await request.body()
    try:
        doc = json.loads(raw or b"{}", parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("request body must be a JSON object")
    return doc


def create_app(broker: Broker) -> FastAPI:
    app = FastAPI(title="sembus broker", docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.broker = broker

    def admin_forbidden(request: Request) -> Response | None:
        token = broker.config.admin_token
        if token and request.headers.get("x-admin-token") != token:
            return _error("admin token required", 403)
        return None

    @app.post("/clients")
    async def register_client(request: Request):
        try:
            doc = await _body(request)
            name = doc.get("name", "")
            transport = doc.get("transport", "queue")
            record = broker.register_client(name, transport,
                                            webhook_url=doc.get("url", ""))
        except (ParseError, ValueError) as exc:
            return _error(str(exc), 400)
        return _json_response(record.to_json(), 201)

    @app.post("/subscriptions")
    async def add_subscription(request: Request):
        try:
            doc = await _body(request)
            s = broker.subscribe(doc.get("client_id", ""),
                                 doc.get("subscription", {}))
        except UnknownClient as exc:
            return _error(f"unknown client {exc.args[0]!r}", 404)
        except DuplicateSubscription as exc:
            return _error(str(exc), 409)
        except (ParseError, ValueError) as exc:
            return _error(str(exc), 400)
        return _json_response({"sub_id": s.sub_id}, 201)

    @app.delete("/subscriptions/{sub_id}")
    async def remove_subscription(sub_id: str):
        if broker.unsubscribe(sub_id):
            return _json_response({"removed": sub_id})
        return _error(f"unknown subscription {sub_id!r}", 404)

    @app.post("/publications")
    async def publish(request: Request):
        try:
            doc = await _body(request)
            receipt = broker.publish(doc.get("client_id", ""),
                                     doc.get("event", {}))
        except UnknownClient as exc:
            return _error(f"unknown client {exc.args[0]!r}", 404)
        except (ParseError, ValueError) as exc:
            return _error(str(exc), 400)
        return _json_response(receipt, 201)

    @app.get("/notifications")
    async def drain_notifications(client_id: str = ""):
        try:
            drained = broker.drain_notifications(client_id)
        except UnknownClient as exc:
            return _error(f"unknown client {exc.args[0]!r}", 404)
        return _json_response({"notifications": drained})

    @app.get("/stream")
    async def stream(client_id: str = ""):
        try:
            broker.client(client_id)
        except UnknownClient as exc:
            return _error(f"unknown client {exc.args[0]!r}", 404)

        def feed():
            listener = broker.delivery.open_stream(client_id)
            try:
                yield ": connected\n\n"
                while True:
                    try:
                        n = listener.get(timeout=STREAM_KEEPALIVE_SECONDS)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"id: {n['dedupe_key']}\ndata: {canonical_json(n)}\n\n"
            finally:
                broker.delivery.close_stream(client_id, listener)

        return StreamingResponse(feed(), media_type="text/event-stream",
                                 headers={"cache-control": "no-cache"})

    @app.post("/admin/mode")
    async def set_mode(request: Request):
        forbidden = admin_forbidden(request)
        if forbidden is not None:
            return forbidden
        try:
            doc = await _body(request)
            mode = broker.set_mode(doc.get("mode", ""))
        except (ParseError, ValueError):
            return _error("mode must be 'semantic' or 'syntactic'", 400)
        return _json_response({"mode": mode.value})

    @app.get("/status")
    async def status():
        return _json_response(broker.status())

    @app.get("/admin/dead-letters")
    async def dead_letters(request: Request):
        forbidden = admin_forbidden(request)
        if forbidden is not None:
            return forbidden
        return _json_response({"dead_letters": broker.delivery.dead_letters()})

    return app

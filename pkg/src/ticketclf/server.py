"""HTTP classification endpoint over a loaded pipeline bundle.

``POST /classify`` takes ``{"summary": str, "description": str}`` and answers
``{"label": "BUG"|"NBUG", "probability": float|null, "model_version": str}``.
``GET /health`` reports readiness (503 until a model is loaded).
"""
from __future__ import annotations

import json
import logging
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .pipeline import TrainedPipeline, ticket_from_payload

logger = logging.getLogger(__name__)

REQUEST_SCHEMA = {"summary": "string (required)", "description": "string (optional)"}


def make_handler(pipeline: TrainedPipeline | None):
    class Handler(BaseHTTPRequestHandler):
        server_version = "ticketclf"

        def _send(self, status: int, body: dict):
            data = json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, fmt, *args):
            logger.debug("%s - %s", self.address_string(), fmt % args)

        def do_GET(self):
            if self.path != "/health":
                return self._send(404, {"error": f"no route {self.path}"})
            if pipeline is None:
                return self._send(503, {"status": "unavailable", "error": "model not loaded"})
            self._send(200, {"status": "ready", "model_version": pipeline.version})

        def do_POST(self):
            if self.path != "/classify":
                return self._send(404, {"error": f"no route {self.path}"})
            if pipeline is None:
                return self._send(503, {"error": "model not loaded"})
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            try:
                ticket = ticket_from_payload(json.loads(raw.decode("utf-8")))
            except (ValueError, UnicodeDecodeError) as exc:
                return self._send(400, {"error": f"malformed request body: {exc}", "schema": REQUEST_SCHEMA})
            result = pipeline.classify([ticket])[0]
            self._send(200, {"label": result["label"], "probability": result["probability"],
                             "model_version": pipeline.version})

    return Handler


def make_server(pipeline: TrainedPipeline | None, host: str = "127.0.0.1", port: int = 8000):
    return ThreadingHTTPServer((host, port), make_handler(pipeline))


def serve(bundle_path, host: str = "127.0.0.1", port: int = 8000) -> None:
    server = make_server(TrainedPipeline.load(bundle_path), host, port)
    logger.info("serving %s on http://%s:%d", bundle_path, host, server.server_address[1])
    try:
        server.serve_forever()
    finally:
        server.server_close()

"""HTTP server exposing a ServedModel over the session wire protocol.

Same routes, payloads, and error codes as the reference server, so the
standard remote client (and its conformance checks) run against this
adapter unchanged.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .model import ModelSession, ServedModel, SessionFault

_SESSION_PATH = re.compile(r"^/v1/sessions/([^/]+)(?:/(fork|next|score|append))?$")

_STATUS = {
    "session_not_found": 404,
    "session_finished": 409,
    "backend_unavailable": 503,
}


class _AdapterThreadingServer(ThreadingHTTPServer):
    daemon_threads = True
    owner: "AdapterHTTPServer"


class _Handler(BaseHTTPRequestHandler):
    server: _AdapterThreadingServer
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        if self.server.owner.verbose:
            super().log_message(fmt, *args)

    def _body(self) -> dict:
        if not self._raw_body:
            return {}
        try:
            body = json.loads(self._raw_body)
        except ValueError:
            raise SessionFault("bad_request", "request body is not JSON")
        if not isinstance(body, dict):
            raise SessionFault("bad_request", "request body must be a JSON object")
        return body

    def _reply(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _dispatch(self, method: str) -> None:
        # Drain the body before replying; leftover bytes on the socket
        # would corrupt the next keep-alive request.
        length = int(self.headers.get("Content-Length") or 0)
        self._raw_body = self.rfile.read(length) if length else b""
        try:
            self._reply(200, self._route(method))
        except SessionFault as exc:
            self._reply(_STATUS.get(exc.code, 400), {"error": exc.code})
        except Exception:  # noqa: BLE001 - wire boundary
            self._reply(500, {"error": "internal"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_DELETE(self):
        self._dispatch("DELETE")

    def _route(self, method: str) -> dict:
        owner = self.server.owner
        if method == "GET" and self.path == "/v1/model":
            return owner.served.describe()
        if method == "POST" and self.path == "/v1/sessions":
            body = self._body()
            if "prompt" not in body or not isinstance(body["prompt"], str):
                raise SessionFault("bad_request", "prompt (string) required")
            return {"session_id": owner.create_session(body["prompt"])}
        m = _SESSION_PATH.match(self.path)
        if not m:
            raise SessionFault("bad_request", f"no such route: {method} {self.path}")
        session_id, verb = m.group(1), m.group(2)
        if method == "DELETE" and verb is None:
            owner.delete_session(session_id)
            return {"ok": True}
        if method != "POST" or verb is None:
            raise SessionFault("bad_request", f"no such route: {method} {self.path}")
        session = owner.get_session(session_id)
        body = self._body()
        if verb == "fork":
            return {"session_id": owner.adopt_session(session.fork())}
        if verb == "next":
            return session.next_tokens(body.get("n", 1))
        if verb == "score":
            return session.score(_text_field(body))
        if verb == "append":
            session.append(_text_field(body))
            return {"ok": True}
        raise SessionFault("bad_request", f"no such verb: {verb}")  # pragma: no cover


def _text_field(body: dict) -> str:
    if "text" not in body or not isinstance(body["text"], str):
        raise SessionFault("bad_request", "text (string) required")
    return body["text"]


class AdapterHTTPServer:
    """Owns the HTTP server thread and the session table."""

    def __init__(self, served: ServedModel, host: str = "127.0.0.1", port: int = 0,
                 verbose: bool = False):
        self.served = served
        self.verbose = verbose
        self._sessions: dict[str, ModelSession] = {}
        self._lock = threading.Lock()
        self._httpd = _AdapterThreadingServer((host, port), _Handler)
        self._httpd.owner = self
        self._thread: Optional[threading.Thread] = None

    def create_session(self, prompt: str) -> str:
        return self.adopt_session(ModelSession(self.served, prompt))

    def adopt_session(self, session: ModelSession) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get_session(self, session_id: str) -> ModelSession:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionFault("session_not_found", f"unknown session: {session_id}")
        return session

    def delete_session(self, session_id: str) -> None:
        with self._lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise SessionFault("session_not_found", f"unknown session: {session_id}")

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "AdapterHTTPServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5)
        self._httpd.server_close()

    def __enter__(self) -> "AdapterHTTPServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

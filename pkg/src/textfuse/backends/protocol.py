"""HTTP server hosting any Backend over the session wire protocol.

A thin JSON layer over the Session interface, built on the stdlib
threading HTTP server.  Used to integration-test the remote client
against mock backends and as the reference for external servers.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import asdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from ..errors import (
    ProtocolError,
    SessionNotFound,
    TextFuseError,
    error_code,
)
from .base import Backend, Session

_SESSION_PATH = re.compile(r"^/v1/sessions/([^/]+)(?:/(fork|next|score|append))?$")

_STATUS = {
    "session_not_found": 404,
    "session_finished": 409,
    "backend_unavailable": 503,
}


class _ProtocolHTTPServer(ThreadingHTTPServer):
    daemon_threads = True
    owner: "BackendHTTPServer"


class _Handler(BaseHTTPRequestHandler):
    server: _ProtocolHTTPServer
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        if self.server.owner.verbose:
            super().log_message(fmt, *args)

    # -- plumbing ----------------------------------------------------------

    def _body(self) -> dict:
        if not self._raw_body:
            return {}
        try:
            body = json.loads(self._raw_body)
        except ValueError:
            raise ProtocolError("request body is not JSON")
        if not isinstance(body, dict):
            raise ProtocolError("request body must be a JSON object")
        return body

    def _reply(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _dispatch(self, method: str) -> None:
        # Drain the body up front; replying with unread body bytes on the
        # socket would corrupt the next keep-alive request.
        length = int(self.headers.get("Content-Length") or 0)
        self._raw_body = self.rfile.read(length) if length else b""
        try:
            self._reply(200, self._route(method))
        except TextFuseError as exc:
            code = error_code(exc)
            self._reply(_STATUS.get(code, 400), {"error": code})
        except Exception:  # noqa: BLE001 - wire boundary
            self._reply(500, {"error": "internal"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_DELETE(self):
        self._dispatch("DELETE")

    # -- routes ------------------------------------------------------------

    def _route(self, method: str) -> dict:
        owner = self.server.owner
        if method == "GET" and self.path == "/v1/model":
            return asdict(owner.backend.descriptor)
        if method == "POST" and self.path == "/v1/sessions":
            body = self._body()
            if "prompt" not in body or not isinstance(body["prompt"], str):
                raise ProtocolError("prompt (string) required")
            return {"session_id": owner.create_session(body["prompt"])}
        m = _SESSION_PATH.match(self.path)
        if not m:
            raise ProtocolError(f"no such route: {method} {self.path}")
        session_id, verb = m.group(1), m.group(2)
        if method == "DELETE" and verb is None:
            owner.delete_session(session_id)
            return {"ok": True}
        if method != "POST" or verb is None:
            raise ProtocolError(f"no such route: {method} {self.path}")
        session = owner.get_session(session_id)
        body = self._body()
        if verb == "fork":
            return {"session_id": owner.adopt_session(session.fork())}
        if verb == "next":
            return owner.generate(session, body.get("n", 1))
        if verb == "score":
            nll_sum, count = session.score_text(_text_field(body))
            return {"nll_sum": nll_sum, "token_count": count}
        if verb == "append":
            session.append_text(_text_field(body))
            return {"ok": True}
        raise ProtocolError(f"no such verb: {verb}")  # pragma: no cover


def _text_field(body: dict) -> str:
    if "text" not in body or not isinstance(body["text"], str):
        raise ProtocolError("text (string) required")
    return body["text"]


class BackendHTTPServer:
    """Owns the HTTP server thread and the session table."""

    def __init__(self, backend: Backend, host: str = "127.0.0.1", port: int = 0,
                 verbose: bool = False):
        self.backend = backend
        self.verbose = verbose
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._httpd = _ProtocolHTTPServer((host, port), _Handler)
        self._httpd.owner = self
        self._thread: Optional[threading.Thread] = None

    # -- session table -----------------------------------------------------

    def create_session(self, prompt: str) -> str:
        return self.adopt_session(self.backend.open_session(prompt))

    def adopt_session(self, session: Session) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get_session(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFound(session_id)
        return session

    def delete_session(self, session_id: str) -> None:
        with self._lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise SessionNotFound(session_id)
        session.close()

    def generate(self, session: Session, n) -> dict:
        if not isinstance(n, int) or n < 1:
            raise ProtocolError("n must be a positive integer")
        tokens: list[int] = []
        nlls: list[float] = []
        parts: list[str] = []
        eos = session.finished
        for _ in range(n):
            if session.finished:
                eos = True
                break
            token, nll, eos = session.next_token()
            if eos:
                break
            tokens.append(token)
            nlls.append(nll)
            flushed = session.try_flush_pending(self.backend.window)
            if flushed:
                parts.append(flushed)
        return {
            "tokens": tokens,
            "nlls": nlls,
            "texts_incremental": "".join(parts),
            "eos": eos,
        }

    # -- lifecycle ---------------------------------------------------------

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "BackendHTTPServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5)
        self._httpd.server_close()

    def __enter__(self) -> "BackendHTTPServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

"""HTTP client backend speaking the session wire protocol.

The client keeps a local mirror of each remote context (text plus token
ids, via a client-side tokenizer equivalent to the server's) so that
segmentation and incremental codecs run locally while generation,
scoring, and state updates happen on the server.
"""

from __future__ import annotations

import time
from collections import deque
from typing import Any, Optional

import requests

from ..errors import BackendUnavailable, ProtocolError, SessionFinished, raise_for_code
from ..tokenizers import CodecWindow, Tokenizer
from .base import Backend, Session, require_nonempty


class RemoteBackend(Backend):
    def __init__(
        self,
        base_url: str,
        tokenizer: Tokenizer,
        window: CodecWindow = CodecWindow(),
        timeout: float = 10.0,
        retries: int = 2,
        retry_wait: float = 0.05,
        prefetch: int = 1,
        model_id: Optional[str] = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.retry_wait = retry_wait
        self.prefetch = max(1, prefetch)
        self._http = requests.Session()
        info = self.request("GET", "/v1/model")
        if info["tokenizer_category"] != tokenizer.category.value:
            raise ProtocolError(
                f"server reports category {info['tokenizer_category']}, "
                f"client tokenizer is {tokenizer.category.value}")
        if info["vocab_size"] != tokenizer.vocab_size:
            raise ProtocolError(
                f"server vocab size {info['vocab_size']} != client {tokenizer.vocab_size}")
        super().__init__(model_id or info["model_id"], tokenizer, window)

    def request(self, method: str, path: str, body: Optional[dict] = None) -> dict:
        """One protocol call with bounded retries on transport faults
        and 5xx; protocol-level 4xx errors raise their mapped type."""
        url = self.base_url + path
        last: Any = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.retry_wait)
            try:
                resp = self._http.request(method, url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                last = exc
                continue
            if resp.status_code >= 500:
                last = f"HTTP {resp.status_code}"
                continue
            if resp.status_code >= 400:
                try:
                    code = resp.json().get("error", "bad_request")
                except ValueError:
                    code = "bad_request"
                raise_for_code(code, f"{method} {path}: HTTP {resp.status_code}")
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"{method} {path}: non-JSON response") from exc
        raise BackendUnavailable(
            f"{method} {url} failed after {self.retries + 1} attempts: {last}")

    def open_session(self, prompt: str) -> "RemoteSession":
        ids = self.tokenizer.encode(prompt)
        reply = self.request("POST", "/v1/sessions", {"prompt": prompt})
        return RemoteSession(self, reply["session_id"], prompt, ids.ids)

    def close(self) -> None:
        self._http.close()


class RemoteSession(Session):
    def __init__(self, backend: RemoteBackend, session_id: str, text, ids):
        super().__init__(backend, text, ids)
        self.session_id = session_id
        self._fetched: deque[tuple[int, float]] = deque()
        self._remote_eos = False

    def _call(self, verb: str, body: Optional[dict] = None, method="POST") -> dict:
        return self.backend.request(method, f"/v1/sessions/{self.session_id}/{verb}", body)

    def _generate(self):
        if not self._fetched and not self._remote_eos:
            reply = self.backend.request(
                "POST", f"/v1/sessions/{self.session_id}/next",
                {"n": self.backend.prefetch})
            self._fetched.extend(zip(reply["tokens"], reply["nlls"]))
            self._remote_eos = bool(reply["eos"])
        if self._fetched:
            token, nll = self._fetched.popleft()
            return token, nll, False
        # The eos decision's own nll is not part of the wire format.
        return -1, 0.0, True

    def score_text(self, text: str) -> tuple[float, int]:
        require_nonempty(text)
        reply = self._call("score", {"text": text})
        return float(reply["nll_sum"]), int(reply["token_count"])

    def append_text(self, text: str) -> None:
        if self.finished:
            raise SessionFinished(f"{self.model_id}: context already hit eos")
        if text == "":
            return
        self._call("append", {"text": text})
        super().append_text(text)

    def fork(self) -> "RemoteSession":
        if self._fetched:
            # The server context is ahead of the consumed mirror; a fork
            # here would duplicate the prefetched tokens.
            raise ProtocolError(f"{self.model_id}: fork with unconsumed prefetched tokens")
        reply = self._call("fork", {})
        clone = RemoteSession(self.backend, reply["session_id"], self._text, self._ids)
        clone._pending = self._pending
        clone.finished = self.finished
        clone._remote_eos = self._remote_eos
        return clone

    def close(self) -> None:
        if self.closed:
            return
        try:
            self.backend.request("DELETE", f"/v1/sessions/{self.session_id}")
        except BackendUnavailable:
            pass
        super().close()

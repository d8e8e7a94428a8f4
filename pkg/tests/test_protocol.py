"""Wire protocol: server routes, client retries, remote-vs-local parity."""

import json
import math
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest
import requests

from textfuse.backends import BackendHTTPServer, NGramBackend, RemoteBackend
from textfuse.backends.conformance import ALL_CHECKS, run_conformance
from textfuse.engine import FusionConfig, FusionMode, fuse
from textfuse.errors import (
    BackendUnavailable,
    ProtocolError,
    SessionFinished,
    SessionNotFound,
)
from textfuse.segmenter import SegmentMode


@pytest.fixture(scope="module")
def served(all_tokenizers, demo_corpus):
    word_tok = all_tokenizers[0]
    backend = NGramBackend("served-word", word_tok, demo_corpus, order=3)
    with BackendHTTPServer(backend) as server:
        yield server, word_tok


@pytest.fixture()
def remote(served):
    server, word_tok = served
    backend = RemoteBackend(server.url, word_tok)
    yield backend
    backend.close()


def post(server, path, payload):
    return requests.post(server.url + path, json=payload, timeout=5)


# -- raw wire shape --------------------------------------------------------


def test_model_endpoint_reports_descriptor(served):
    server, word_tok = served
    reply = requests.get(server.url + "/v1/model", timeout=5).json()
    assert reply == {
        "model_id": "served-word",
        "tokenizer_category": "word_ids",
        "vocab_size": word_tok.vocab_size,
    }


def test_session_create_score_append_delete(served):
    server, _ = served
    sid = post(server, "/v1/sessions", {"prompt": "the sky is"}).json()["session_id"]
    scored = post(server, f"/v1/sessions/{sid}/score", {"text": " blue"}).json()
    assert scored["token_count"] >= 1 and scored["nll_sum"] > 0
    assert post(server, f"/v1/sessions/{sid}/append", {"text": " blue"}).json() == {"ok": True}
    reply = requests.delete(server.url + f"/v1/sessions/{sid}", timeout=5)
    assert reply.json() == {"ok": True}


def test_next_returns_tokens_nlls_and_flushed_text(served):
    server, word_tok = served
    sid = post(server, "/v1/sessions", {"prompt": "the sky is"}).json()["session_id"]
    reply = post(server, f"/v1/sessions/{sid}/next", {"n": 4}).json()
    assert set(reply) == {"tokens", "nlls", "texts_incremental", "eos"}
    assert len(reply["tokens"]) == len(reply["nlls"])
    # Differential against a local session over the same model.
    local = server.backend.open_session("the sky is")
    parts = []
    for _ in range(4):
        token, nll, eos = local.next_token()
        if eos:
            break
        parts.append(local.try_flush_pending() or "")
    assert reply["texts_incremental"] == "".join(parts)


def test_protocol_error_codes(served):
    server, _ = served
    # Unknown session.
    r = post(server, "/v1/sessions/nope/score", {"text": " blue"})
    assert (r.status_code, r.json()["error"]) == (404, "session_not_found")
    # Empty segment.
    sid = post(server, "/v1/sessions", {"prompt": "the sky"}).json()["session_id"]
    r = post(server, f"/v1/sessions/{sid}/score", {"text": ""})
    assert (r.status_code, r.json()["error"]) == (400, "empty_segment")
    # Missing fields and malformed bodies.
    r = post(server, "/v1/sessions", {})
    assert (r.status_code, r.json()["error"]) == (400, "bad_request")
    r = post(server, f"/v1/sessions/{sid}/next", {"n": 0})
    assert (r.status_code, r.json()["error"]) == (400, "bad_request")
    r = post(server, f"/v1/sessions/{sid}/next", {"n": "three"})
    assert (r.status_code, r.json()["error"]) == (400, "bad_request")
    r = requests.post(server.url + f"/v1/sessions/{sid}/append",
                      data=b"not json", timeout=5)
    assert (r.status_code, r.json()["error"]) == (400, "bad_request")
    r = post(server, "/v1/sessions/nope/unknown-verb", {})
    assert (r.status_code, r.json()["error"]) == (400, "bad_request")
    # Double delete.
    requests.delete(server.url + f"/v1/sessions/{sid}", timeout=5)
    r = requests.delete(server.url + f"/v1/sessions/{sid}", timeout=5)
    assert (r.status_code, r.json()["error"]) == (404, "session_not_found")


def test_append_after_eos_maps_to_conflict(served):
    server, _ = served
    sid = post(server, "/v1/sessions", {"prompt": "the sky is"}).json()["session_id"]
    for _ in range(200):
        if post(server, f"/v1/sessions/{sid}/next", {"n": 8}).json()["eos"]:
            break
    else:
        pytest.skip("greedy stream did not terminate in budget")
    r = post(server, f"/v1/sessions/{sid}/append", {"text": " blue"})
    assert (r.status_code, r.json()["error"]) == (409, "session_finished")
    # /next on a finished session just reports eos again.
    reply = post(server, f"/v1/sessions/{sid}/next", {"n": 1}).json()
    assert reply == {"tokens": [], "nlls": [], "texts_incremental": "", "eos": True}


# -- client behavior -------------------------------------------------------


def test_remote_backend_passes_conformance(remote):
    names = run_conformance(remote, "the sky is", " blue")
    assert names == [c.__name__ for c in ALL_CHECKS]


def test_remote_matches_local_everywhere(served, remote):
    server, word_tok = served
    local = server.backend.open_session("the snow is")
    rs = remote.open_session("the snow is")
    try:
        for _ in range(6):
            lt = local.next_token()
            rt = rs.next_token()
            assert lt[0] == rt[0] and lt[2] == rt[2]
            assert math.isclose(lt[1], rt[1], rel_tol=1e-12)
            if lt[2]:
                break
            assert local.try_flush_pending() == rs.try_flush_pending()
        assert local.committed_text == rs.committed_text
        l_score = local.score_text(" white")
        r_score = rs.score_text(" white")
        assert l_score[1] == r_score[1]
        assert math.isclose(l_score[0], r_score[0], rel_tol=1e-12)
    finally:
        local.close()
        rs.close()


def test_remote_append_keeps_mirror_in_sync(served, remote):
    server, word_tok = served
    rs = remote.open_session("the sky")
    try:
        rs.append_text(" is")
        rs.append_text(" blue")
        assert rs.committed_text == "the sky is blue"
        assert list(rs.context_ids) == list(word_tok.encode("the sky is blue").ids)
    finally:
        rs.close()


def test_fork_with_unconsumed_prefetch_rejected(served):
    server, word_tok = served
    backend = RemoteBackend(server.url, word_tok, prefetch=3)
    rs = backend.open_session("the sky is")
    try:
        rs.next_token()  # fetched 3, consumed 1
        with pytest.raises(ProtocolError):
            rs.fork()
    finally:
        rs.close()
        backend.close()


def test_client_maps_error_codes_back(served, remote):
    rs = remote.open_session("the sky")
    rs.close()
    with pytest.raises(SessionNotFound):
        rs.score_text(" is")  # session deleted on close
    s2 = remote.open_session("the sky is")
    try:
        for _ in range(2000):
            _, _, eos = s2.next_token()
            if eos:
                break
            s2.try_flush_pending()
        assert s2.finished
        with pytest.raises(SessionFinished):
            s2.append_text(" blue")  # rejected client-side before the wire
    finally:
        s2.close()


def test_tokenizer_mismatch_rejected(served, byte_tok):
    server, _ = served
    with pytest.raises(ProtocolError):
        RemoteBackend(server.url, byte_tok)


def test_dead_port_raises_backend_unavailable(word_tok):
    with pytest.raises(BackendUnavailable):
        RemoteBackend("http://127.0.0.1:9", word_tok, retries=1, retry_wait=0.01,
                      timeout=0.5)


# -- retry policy against a fault-injecting stub ---------------------------


class _FlakyStub:
    """Serves /v1/model after a configurable number of 500s."""

    def __init__(self, failures, payload):
        self.failures = failures
        self.requests_seen = 0
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):
                pass

            def do_GET(self):
                stub.requests_seen += 1
                if stub.requests_seen <= stub.failures:
                    body = b"{}"
                    self.send_response(500)
                else:
                    body = json.dumps(payload).encode()
                    self.send_response(200)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    def __enter__(self):
        self._thread.start()
        host, port = self._httpd.server_address[:2]
        return self, f"http://{host}:{port}"

    def __exit__(self, *exc):
        self._httpd.shutdown()
        self._httpd.server_close()


def _model_payload(tok):
    return {"model_id": "stub", "tokenizer_category": tok.category.value,
            "vocab_size": tok.vocab_size}


def test_transient_5xx_is_retried(word_tok):
    with _FlakyStub(2, _model_payload(word_tok)) as (stub, url):
        backend = RemoteBackend(url, word_tok, retries=2, retry_wait=0.01)
        backend.close()
        assert stub.requests_seen == 3  # two failures, then success


def test_persistent_5xx_exhausts_retries(word_tok):
    with _FlakyStub(99, _model_payload(word_tok)) as (stub, url):
        with pytest.raises(BackendUnavailable):
            RemoteBackend(url, word_tok, retries=2, retry_wait=0.01)
        assert stub.requests_seen == 3  # bounded attempts


# -- engine over the wire --------------------------------------------------


def test_fusion_over_wire_matches_local(all_tokenizers, left_corpus, right_corpus):
    word_tok, _, _, prefix_tok = all_tokenizers
    config = FusionConfig(mode=FusionMode.COOL, segment_mode=SegmentMode.SHORTEST,
                          max_iterations=8, max_new_chars=60, stop_strings=(" .",))

    def build_locals():
        return [NGramBackend("left", word_tok, left_corpus, order=3),
                NGramBackend("right", prefix_tok, right_corpus, order=3)]

    local_result = fuse("the sky is", build_locals(), config)
    a, b = build_locals()
    with BackendHTTPServer(a) as sa, BackendHTTPServer(b) as sb:
        remotes = [RemoteBackend(sa.url, word_tok, prefetch=1),
                   RemoteBackend(sb.url, prefix_tok, prefetch=1)]
        remote_result = fuse("the sky is", remotes, config)
        for backend in remotes:
            backend.close()
    assert remote_result.joint_text == local_result.joint_text
    assert [e.winner_model for e in remote_result.trace] == \
        [e.winner_model for e in local_result.trace]
    for re_event, le_event in zip(remote_result.trace, local_result.trace):
        for rc, lc in zip(re_event.candidates, le_event.candidates):
            assert rc.segment_text == lc.segment_text
            assert math.isclose(rc.avg_ppl, lc.avg_ppl, rel_tol=1e-9)

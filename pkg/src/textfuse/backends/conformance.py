"""Behavioral conformance checks for Backend implementations.

Each check exercises one contract every backend must honor: fork
isolation, greedy determinism, side-effect-free scoring, generation /
scoring self-consistency, and append semantics.  Checks are written
against the public Session surface only, so they run unchanged against
in-process mocks, the HTTP client, or any third-party server.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

from ..errors import EmptySegment, SessionFinished
from .base import Backend

Check = Callable[[Backend, str, str], None]


def _generate(session, limit: int) -> tuple[list[int], list[float]]:
    tokens, nlls = [], []
    for _ in range(limit):
        if session.finished:  # forks inherit the flag
            break
        token, nll, eos = session.next_token()
        if eos:
            break
        tokens.append(token)
        nlls.append(nll)
        session.try_flush_pending()
    return tokens, nlls


def check_open_and_describe(backend, prompt, text):
    d = backend.descriptor
    assert d.model_id, "descriptor must carry a model id"
    assert d.vocab_size == backend.tokenizer.vocab_size, "vocab size mismatch"
    assert d.tokenizer_category == backend.tokenizer.category.value, "category mismatch"
    s = backend.open_session(prompt)
    assert s.committed_text == prompt, "session context must start as the prompt"
    s.close()


def check_greedy_determinism(backend, prompt, text):
    a = backend.open_session(prompt)
    b = backend.open_session(prompt)
    try:
        assert _generate(a, 8) == _generate(b, 8), \
            "identical contexts must yield identical greedy streams"
    finally:
        a.close()
        b.close()


def check_fork_isolation(backend, prompt, text):
    parent = backend.open_session(prompt)
    child = parent.fork()
    try:
        before = parent.context_ids
        _generate(child, 5)
        assert parent.context_ids == before, "child generation must not touch parent"
        grandchild = child.fork()
        _generate(grandchild, 3)
        grandchild.close()
        # A fork must behave like a fresh session over the same text.
        fresh = backend.open_session(prompt)
        fork2 = parent.fork()
        assert _generate(fork2, 8) == _generate(fresh, 8), \
            "fork must equal a rebuilt session"
        fresh.close()
        fork2.close()
    finally:
        child.close()
        parent.close()


def check_score_is_pure(backend, prompt, text):
    s = backend.open_session(prompt)
    probe = s.fork()
    expected = _generate(probe, 8)
    probe.close()
    s.score_text(text)
    s.score_text(text)
    probe = s.fork()
    try:
        assert _generate(probe, 8) == expected, "scoring must not perturb generation"
    finally:
        probe.close()
        s.close()


def check_score_self_consistency(backend, prompt, text):
    """Scoring the session's own greedy segment reproduces its nll sum."""
    base = backend.open_session(prompt)
    gen = base.fork()
    tokens, nlls, parts = [], [], []
    covered = 0  # tokens folded into flushed text so far
    for _ in range(6):
        token, nll, eos = gen.next_token()
        if eos:
            break
        tokens.append(token)
        nlls.append(nll)
        flushed = gen.try_flush_pending()
        if flushed:
            parts.append(flushed)
            covered = len(tokens)
    gen.close()
    produced = "".join(parts)
    if not produced:
        base.close()
        return
    scorer = base.fork()
    nll_sum, count = scorer.score_text(produced)
    scorer.close()
    base.close()
    if count != covered:
        # The scorer re-encoded the text differently from the generated
        # split; per-token sums are not comparable then.
        return
    expect = math.fsum(nlls[:covered])
    assert math.isclose(nll_sum, expect, rel_tol=1e-9, abs_tol=1e-9), \
        f"self-score {nll_sum} != generation sum {expect}"


def check_append_rebuild_equivalence(backend, prompt, text):
    incremental = backend.open_session(prompt)
    incremental.append_text(text)
    rebuilt = backend.open_session(prompt + text)
    try:
        assert incremental.committed_text == rebuilt.committed_text
        assert _generate(incremental, 8) == _generate(rebuilt, 8), \
            "append must equal rebuilding from concatenated text"
    finally:
        incremental.close()
        rebuilt.close()


def check_append_empty_is_noop(backend, prompt, text):
    s = backend.open_session(prompt)
    before = s.context_ids
    s.append_text("")
    try:
        assert s.context_ids == before, "empty append must not change context"
    finally:
        s.close()


def check_empty_score_rejected(backend, prompt, text):
    s = backend.open_session(prompt)
    try:
        try:
            s.score_text("")
        except EmptySegment:
            pass
        else:
            raise AssertionError("scoring empty text must raise EmptySegment")
    finally:
        s.close()


def check_finished_semantics(backend, prompt, text):
    s = backend.open_session(prompt)
    try:
        for _ in range(10_000):
            _, _, eos = s.next_token()
            if eos:
                break
            s.try_flush_pending()
        else:
            return  # stream longer than probe budget; nothing to assert
        try:
            s.next_token()
        except SessionFinished:
            pass
        else:
            raise AssertionError("next_token after eos must raise SessionFinished")
        try:
            s.append_text(text)
        except SessionFinished:
            pass
        else:
            raise AssertionError("append after eos must raise SessionFinished")
    finally:
        s.close()


ALL_CHECKS: Sequence[Check] = (
    check_open_and_describe,
    check_greedy_determinism,
    check_fork_isolation,
    check_score_is_pure,
    check_score_self_consistency,
    check_append_rebuild_equivalence,
    check_append_empty_is_noop,
    check_empty_score_rejected,
    check_finished_semantics,
)


def run_conformance(backend: Backend, prompt: str, text: str) -> list[str]:
    """Run every check; returns their names.  AssertionError (with the
    failing check's name) on the first violation.

    ``text`` must be appendable and scorable after ``prompt`` under the
    backend's tokenizer, e.g. a short in-vocabulary continuation.
    """
    passed = []
    for check in ALL_CHECKS:
        try:
            check(backend, prompt, text)
        except AssertionError as exc:
            raise AssertionError(f"{check.__name__}: {exc}") from exc
        passed.append(check.__name__)
    return passed

"""Model backend interface.

A Backend owns a tokenizer and opens Sessions.  A Session is a growing
left-to-right context that can greedily emit tokens, score a proposed
continuation without consuming it, accept externally chosen text, and
fork into an independent copy.  All engine-side coordination goes
through this interface, so in-process mocks and remote servers are
interchangeable.
"""

from __future__ import annotations

import abc
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from ..errors import EmptySegment, SessionFinished, WindowMismatch
from ..tokenizers import (
    CodecWindow,
    Tokenizer,
    TokenSeq,
    context_tail,
    decode_incremental,
    encode_incremental,
)


@dataclass(frozen=True)
class BackendDescriptor:
    """Static facts about a backend, safe to ship over a wire."""

    model_id: str
    tokenizer_category: str
    vocab_size: int


class Session(abc.ABC):
    """One model context.  Subclasses implement _generate / scoring /
    forking; the base class keeps the (text, ids) mirror in sync.

    ``_ids`` holds every token in context.  The trailing ``_pending``
    count covers greedily emitted tokens whose decode has not been
    folded into ``_text`` yet; committed state is everything before
    them.
    """

    def __init__(self, backend: "Backend", text: str, ids: Sequence[int]):
        self.backend = backend
        self.closed = False
        self.finished = False
        self._text = text
        self._ids: list[int] = list(ids)
        self._pending = 0

    # -- read side ---------------------------------------------------------

    @property
    def model_id(self) -> str:
        return self.backend.descriptor.model_id

    @property
    def tokenizer(self) -> Tokenizer:
        return self.backend.tokenizer

    @property
    def context_ids(self) -> tuple[int, ...]:
        return tuple(self._ids)

    @property
    def committed_text(self) -> str:
        return self._text

    def committed_ids(self) -> list[int]:
        n = len(self._ids) - self._pending
        return self._ids[:n]

    def context_tail(self, window: CodecWindow = CodecWindow()):
        """(words, token tail) of the committed context, for codecs."""
        return context_tail(self.tokenizer, self._text, self.committed_ids(), window)

    # -- generation --------------------------------------------------------

    def next_token(self) -> tuple[int, float, bool]:
        """Greedy (token_id, nll, is_eos).  The stop decision is always
        the sentinel triple (-1, 0.0, True); no token enters the context
        and implementations' internal eos ids never leak out."""
        if self.finished:
            raise SessionFinished(f"{self.model_id}: context already hit eos")
        token_id, nll, eos = self._generate()
        if eos:
            self.finished = True
            return -1, 0.0, True
        self._ids.append(token_id)
        self._pending += 1
        return token_id, nll, eos

    def try_flush_pending(self, window: CodecWindow = CodecWindow()) -> Optional[str]:
        """Fold pending tokens into the committed text if their decode
        currently roundtrips; returns the newly committed text."""
        if not self._pending:
            return ""
        words, tail = self.context_tail(window)
        new = self.tokenizer.seq(self._ids[len(self._ids) - self._pending:])
        text = decode_incremental(self.tokenizer, words, tail, new, window)
        if text is None:
            return None
        self._text += text
        self._pending = 0
        return text

    @abc.abstractmethod
    def _generate(self) -> tuple[int, float, bool]: ...

    # -- scoring and mutation ----------------------------------------------

    @abc.abstractmethod
    def score_text(self, text: str) -> tuple[float, int]:
        """(nll_sum, token_count) of text as a continuation of this
        context.  Never mutates the context."""
        ...

    def append_text(self, text: str) -> None:
        """Extend the context with externally chosen text."""
        if self.finished:
            raise SessionFinished(f"{self.model_id}: context already hit eos")
        if self._pending:
            raise WindowMismatch(f"{self.model_id}: append with undecoded pending tokens")
        if text == "":
            return
        ids, resync = self._continuation_ids(text)
        if resync is not None:
            self._ids = resync
        else:
            self._ids.extend(ids)
        self._text += text
        self._on_append(text, ids)

    def _continuation_ids(self, text: str):
        """Tokens for ``text`` in this context.  Returns (ids, resync);
        when the word window cannot localize the join the whole context
        is re-encoded and returned as resync."""
        words, _ = self.context_tail()
        try:
            seq = encode_incremental(self.tokenizer, words, text, self.backend.window)
            return list(seq.ids), None
        except WindowMismatch:
            full = list(self.tokenizer.encode(self._text + text).ids)
            pre = len(self.tokenizer.encode(self._text)) if self._text else 0
            return full[pre:], full

    def _on_append(self, text: str, ids: list[int]) -> None:
        """Subclass hook; mirror updates happen in append_text."""

    @abc.abstractmethod
    def fork(self) -> "Session": ...

    def close(self) -> None:
        self.closed = True


class Backend(abc.ABC):
    """Factory for sessions against one model."""

    def __init__(self, model_id: str, tokenizer: Tokenizer,
                 window: CodecWindow = CodecWindow()):
        self.tokenizer = tokenizer
        self.window = window
        self._model_id = model_id

    @property
    def descriptor(self) -> BackendDescriptor:
        return BackendDescriptor(
            model_id=self._model_id,
            tokenizer_category=self.tokenizer.category.value,
            vocab_size=self.tokenizer.vocab_size,
        )

    @abc.abstractmethod
    def open_session(self, prompt: str) -> Session: ...

    def close(self) -> None:
        """Release backend-wide resources; mocks have none."""


class SessionTokenSource:
    """Adapts a Session to the segmenter's token source protocol.

    Pulled-but-unconsumed tokens live in a local buffer, so pushing
    back never has to rewind the session itself; for greedy decoding
    the session's extra context tokens are consistent with what the
    buffer will replay.
    """

    def __init__(self, session: Session):
        self.session = session
        self.model_id = session.model_id
        self._buffer: deque[tuple[int, float]] = deque()
        self._base_text = session.committed_text
        self._base_ids = list(session.committed_ids())
        self._consumed_text = ""
        self._consumed_ids: list[int] = []

    def next(self) -> tuple[int, float, bool]:
        if self._buffer:
            tok, nll = self._buffer.popleft()
            return tok, nll, False
        return self.session.next_token()

    def push_back(self, items: Sequence[tuple[int, float]]) -> None:
        self._buffer.extendleft(reversed(list(items)))

    def tail(self, window: CodecWindow):
        return context_tail(
            self.session.tokenizer,
            self._base_text + self._consumed_text,
            self._base_ids + self._consumed_ids,
            window,
        )

    def mark_consumed(self, text: str, ids: Sequence[int]) -> None:
        self._consumed_text += text
        self._consumed_ids.extend(ids)

    @property
    def consumed_text(self) -> str:
        return self._consumed_text


def require_nonempty(text: str) -> str:
    if text == "":
        raise EmptySegment("empty text cannot be scored or appended")
    return text

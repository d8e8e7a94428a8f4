"""Segment extraction from a greedy token stream.

Two granularities are supported.  SHORTEST returns the first complete
word when the tokenizer exposes word boundaries, otherwise the first
token prefix whose decode survives the encode roundtrip.  ALIGNED
accumulates shortest segments from the originating stream until the
accumulated text roundtrips through every participating tokenizer, so
all models can score the same span without length bias.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Sequence

from .errors import SegmentCapExceeded, StreamEnded
from .tokenizers import (
    CodecWindow,
    Tokenizer,
    TokenizerCategory,
    TokenSeq,
    decode_incremental,
)


class SegmentMode(Enum):
    SHORTEST = "shortest"
    ALIGNED = "aligned"


@dataclass
class Segment:
    """One candidate text segment and the tokens that produced it."""

    text: str
    origin_model: str
    origin_tokens: TokenSeq
    origin_nlls: tuple[float, ...] = ()
    token_budget_hit: bool = False
    eos: bool = False


class TokenSource(Protocol):
    """Incremental greedy token source for one model."""

    model_id: str

    def next(self) -> tuple[int, float, bool]:
        """Next (token_id, nll, is_eos); the eos triple carries no token."""
        ...

    def push_back(self, items: Sequence[tuple[int, float]]) -> None: ...

    def tail(self, window: CodecWindow) -> tuple[list[str], TokenSeq]:
        """Current decoded-context tail for incremental decoding."""
        ...

    def mark_consumed(self, text: str, ids: Sequence[int]) -> None: ...


class ListTokenSource:
    """Token source over a fixed id list; for tests and offline scans."""

    def __init__(self, tokenizer: Tokenizer, ids, nlls=None, model_id="list",
                 end: str = "eos"):
        self.model_id = model_id
        self._tokenizer = tokenizer
        nlls = list(nlls) if nlls is not None else [0.0] * len(ids)
        if len(nlls) != len(ids):
            raise ValueError("one nll per token required")
        self._queue = deque(zip(list(ids), nlls))
        self._end = end
        self._consumed_text = ""
        self._consumed_ids: list[int] = []

    def next(self):
        if not self._queue:
            if self._end == "eos":
                return (-1, 0.0, True)
            raise StreamEnded(f"{self.model_id}: token list exhausted")
        tok, nll = self._queue.popleft()
        return (tok, nll, False)

    def push_back(self, items):
        self._queue.extendleft(reversed(list(items)))

    def tail(self, window: CodecWindow):
        from .tokenizers import context_tail

        return context_tail(self._tokenizer, self._consumed_text, self._consumed_ids, window)

    def mark_consumed(self, text, ids):
        self._consumed_text += text
        self._consumed_ids.extend(ids)


@dataclass
class _Accum:
    ids: list[int] = field(default_factory=list)
    nlls: list[float] = field(default_factory=list)


def _finish(source: TokenSource, tokenizer: Tokenizer, acc: _Accum, text: str,
            keep: int, *, budget_hit=False, eos=False) -> Segment:
    """Close out a segment over the first ``keep`` accumulated tokens."""
    extra = list(zip(acc.ids[keep:], acc.nlls[keep:]))
    if extra:
        source.push_back(extra)
    ids = acc.ids[:keep]
    source.mark_consumed(text, ids)
    return Segment(
        text=text,
        origin_model=source.model_id,
        origin_tokens=tokenizer.seq(ids),
        origin_nlls=tuple(acc.nlls[:keep]),
        token_budget_hit=budget_hit,
        eos=eos,
    )


def shortest_segment(
    source: TokenSource,
    tokenizer: Tokenizer,
    window: CodecWindow = CodecWindow(),
    cap: int = 32,
) -> Segment:
    if tokenizer.category is TokenizerCategory.OPAQUE:
        return _shortest_opaque(source, tokenizer, window, cap)
    return _shortest_word(source, tokenizer, window, cap)


def _shortest_word(source, tokenizer, window, cap) -> Segment:
    prev_words, prev_tail = source.tail(window)
    acc = _Accum()
    while len(acc.ids) < cap:
        tok, nll, eos = source.next()
        if eos:
            text = _decoded(tokenizer, prev_words, prev_tail, acc.ids, window)
            keep = 0 if text is None else len(acc.ids)
            return _finish(source, tokenizer, acc, text or "", keep, eos=True)
        acc.ids.append(tok)
        acc.nlls.append(nll)
        spans = tokenizer.word_boundaries(tokenizer.seq(acc.ids))
        if len(spans) >= 2:
            first = spans[0]
            return _finish(source, tokenizer, acc, first.text, first.last_token + 1)
    # Cap hit without a second word starting; the whole buffered decode is
    # the segment.
    text = _decoded(tokenizer, prev_words, prev_tail, acc.ids, window)
    if not text:
        raise SegmentCapExceeded(f"{source.model_id}: no decodable text in {cap} tokens")
    return _finish(source, tokenizer, acc, text, len(acc.ids), budget_hit=True)


def _shortest_opaque(source, tokenizer, window, cap) -> Segment:
    prev_words, prev_tail = source.tail(window)
    acc = _Accum()
    while len(acc.ids) < cap:
        tok, nll, eos = source.next()
        if eos:
            # Undecodable trailing tokens die with the stream.
            return _finish(source, tokenizer, acc, "", 0, eos=True)
        acc.ids.append(tok)
        acc.nlls.append(nll)
        text = _decoded(tokenizer, prev_words, prev_tail, acc.ids, window)
        if text is not None:
            return _finish(source, tokenizer, acc, text, len(acc.ids))
    raise SegmentCapExceeded(f"{source.model_id}: no decodable prefix in {cap} tokens")


def _decoded(tokenizer, prev_words, prev_tail, ids, window) -> Optional[str]:
    if not ids:
        return ""
    return decode_incremental(tokenizer, prev_words, prev_tail, tokenizer.seq(ids), window)


def aligned_segment(
    source: TokenSource,
    origin: Tokenizer,
    all_tokenizers: Sequence[Tokenizer],
    window: CodecWindow = CodecWindow(),
    cap: int = 32,
) -> Segment:
    """Accumulate origin-side shortest segments until every tokenizer
    roundtrips the accumulated text byte-exactly."""
    text = ""
    ids: list[int] = []
    nlls: list[float] = []
    budget_hit = False
    eos = False
    while True:
        remaining = cap - len(ids)
        if remaining <= 0:
            budget_hit = True
            break
        piece = shortest_segment(source, origin, window, remaining)
        text += piece.text
        ids.extend(piece.origin_tokens.ids)
        nlls.extend(piece.origin_nlls)
        if piece.eos:
            eos = True
            break
        if piece.token_budget_hit:
            budget_hit = True
            break
        if all(t.roundtrips_text(text) for t in all_tokenizers):
            break
    if budget_hit and not text:
        raise SegmentCapExceeded(f"{source.model_id}: no aligned text in {cap} tokens")
    return Segment(
        text=text,
        origin_model=source.model_id,
        origin_tokens=origin.seq(ids),
        origin_nlls=tuple(nlls),
        token_budget_hit=budget_hit,
        eos=eos,
    )

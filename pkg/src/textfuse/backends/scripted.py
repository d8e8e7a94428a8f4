"""Scripted backend: replays hand-authored tokens and scores.

Used to pin down engine behavior exactly.  Generation is a per-round
list of (token_id, nll) pairs, where the round number is how many
texts have been appended to the context since the prompt; scoring is
a lookup table from text to (nll_sum, token_count).  Forks inherit the
round counter, so a discarded fork and a fresh fork from the same
context replay the same tokens.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from ..errors import EncodingFailure
from ..tokenizers import CodecWindow, Tokenizer
from .base import Backend, Session, require_nonempty

TokenScript = Sequence[Sequence[tuple[int, float]]]
ScoreTable = Mapping[str, tuple[float, int]]


class ScriptedBackend(Backend):
    def __init__(
        self,
        model_id: str,
        tokenizer: Tokenizer,
        script: TokenScript,
        scores: ScoreTable,
        window: CodecWindow = CodecWindow(),
        default_nll: Optional[float] = None,
    ):
        super().__init__(model_id, tokenizer, window)
        self.script = [list(round_tokens) for round_tokens in script]
        self.scores = dict(scores)
        self.default_nll = default_nll

    def open_session(self, prompt: str) -> "ScriptedSession":
        ids = self.tokenizer.encode(prompt)
        return ScriptedSession(self, prompt, ids.ids)


class ScriptedSession(Session):
    def __init__(self, backend, text, ids):
        super().__init__(backend, text, ids)
        self._round = 0
        self._cursor = 0

    def _generate(self):
        script = self.backend.script
        if self._round >= len(script) or self._cursor >= len(script[self._round]):
            return -1, 0.0, True
        token, nll = script[self._round][self._cursor]
        self._cursor += 1
        return token, nll, False

    def score_text(self, text: str) -> tuple[float, int]:
        require_nonempty(text)
        entry = self.backend.scores.get(text)
        if entry is not None:
            return entry
        if self.backend.default_nll is None:
            raise EncodingFailure(f"{self.model_id}: no scripted score for {text!r}")
        ids, _ = self._continuation_ids(text)
        return self.backend.default_nll * len(ids), len(ids)

    def _on_append(self, text, ids):
        self._round += 1
        self._cursor = 0

    def fork(self) -> "ScriptedSession":
        clone = ScriptedSession(self.backend, self._text, self._ids)
        clone._pending = self._pending
        clone.finished = self.finished
        clone._round = self._round
        clone._cursor = self._cursor
        return clone

"""In-process n-gram language model backend.

A deterministic stand-in for a real LM: an order-n add-k smoothed
n-gram over token ids, trained on a line corpus through the backend's
own tokenizer.  Greedy decoding and exact NLLs make every downstream
number reproducible to the bit, which is what the engine tests and the
protocol conformance suite are built on.
"""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from typing import Iterable, Optional, Sequence

from ..tokenizers import CodecWindow, Tokenizer
from .base import Backend, Session, require_nonempty


class NGramModel:
    """Add-k smoothed n-gram over ids 0..vocab_size-1 plus a virtual
    end-of-sequence id at vocab_size.  Contexts shorter than order-1
    are left-padded with a begin marker that is never predicted."""

    def __init__(self, order: int, vocab_size: int, smoothing_k: float = 0.1):
        if order < 1:
            raise ValueError("order must be at least 1")
        self.order = order
        self.vocab_size = vocab_size
        self.smoothing_k = smoothing_k
        self.eos_id = vocab_size
        self.bos_id = vocab_size + 1
        self._counts: dict[tuple[int, ...], Counter] = defaultdict(Counter)
        self._totals: dict[tuple[int, ...], int] = defaultdict(int)

    def train(self, documents: Iterable[Sequence[int]]) -> None:
        for doc in documents:
            context = (self.bos_id,) * (self.order - 1)
            for token in list(doc) + [self.eos_id]:
                self._counts[context][token] += 1
                self._totals[context] += 1
                if self.order > 1:
                    context = context[1:] + (token,)

    def _context(self, ids: Sequence[int]) -> tuple[int, ...]:
        n = self.order - 1
        tail = tuple(ids[-n:]) if n else ()
        return (self.bos_id,) * (n - len(tail)) + tail

    def nll(self, ids: Sequence[int], token: int) -> float:
        """Negative log probability of token after ids."""
        context = self._context(ids)
        count = self._counts.get(context, {}).get(token, 0)
        total = self._totals.get(context, 0)
        # Candidate space: every text id plus eos.
        denom = total + self.smoothing_k * (self.vocab_size + 1)
        # With k=0 an unseen event has probability zero, not an error.
        p = (count + self.smoothing_k) / denom if denom else 0.0
        return -math.log(p) if p > 0.0 else math.inf

    def greedy_next(self, ids: Sequence[int]) -> tuple[int, float]:
        """Most likely next id (eos included), lowest id on ties.

        Smoothing is uniform over candidates, so the argmax over raw
        counts is the argmax over probabilities; an unseen context
        degenerates to the uniform distribution and id 0 wins."""
        counts = self._counts.get(self._context(ids))
        best = min(counts, key=lambda t: (-counts[t], t)) if counts else 0
        return best, self.nll(ids, best)


class NGramBackend(Backend):
    """Backend facade over NGramModel with corpus training."""

    def __init__(
        self,
        model_id: str,
        tokenizer: Tokenizer,
        corpus: Sequence[str],
        order: int = 2,
        smoothing_k: float = 0.1,
        window: CodecWindow = CodecWindow(),
        seed: Optional[int] = None,
        corpus_lines: Optional[int] = None,
    ):
        super().__init__(model_id, tokenizer, window)
        lines = [line for line in corpus if line.strip()]
        if seed is not None:
            random.Random(seed).shuffle(lines)
        if corpus_lines is not None:
            lines = lines[:corpus_lines]
        self.model = NGramModel(order, tokenizer.vocab_size, smoothing_k)
        self.model.train(list(tokenizer.encode(line).ids) for line in lines)

    def open_session(self, prompt: str) -> "NGramSession":
        ids = self.tokenizer.encode(prompt)
        return NGramSession(self, prompt, ids.ids)


class NGramSession(Session):
    def _generate(self):
        token, nll = self.backend.model.greedy_next(self._ids)
        return token, nll, token == self.backend.model.eos_id

    def score_text(self, text: str) -> tuple[float, int]:
        require_nonempty(text)
        ids, _ = self._continuation_ids(text)
        context = list(self._ids)
        total = 0.0
        for token in ids:
            total += self.backend.model.nll(context, token)
            context.append(token)
        return total, len(ids)

    def fork(self) -> "NGramSession":
        clone = NGramSession(self.backend, self._text, self._ids)
        clone._pending = self._pending
        clone.finished = self.finished
        return clone

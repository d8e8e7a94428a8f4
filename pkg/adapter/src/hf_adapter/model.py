"""A transformers causal LM behind the session interface.

The served tokenizer is byte level: ids 0..255 are the raw UTF-8 bytes
of the text and the model's final id is a virtual end-of-sequence that
never appears on the wire.  Generation is restricted to printable ASCII
(plus newline) so every emitted byte decodes immediately; scoring is
computed token by token with exactly the same forward shapes as
generation, so the two agree to the bit.
"""

from __future__ import annotations

import codecs
import threading
from pathlib import Path
from typing import Optional

import torch
from transformers import GPT2LMHeadModel


class SessionFault(Exception):
    """Protocol-level request failure; ``code`` maps to an HTTP status."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


_ALLOWED_BYTES = [10] + list(range(32, 127))


class ServedModel:
    """Loads the model once and owns everything session-independent."""

    def __init__(self, model_dir, model_id: Optional[str] = None,
                 device: str = "cpu"):
        path = Path(model_dir)
        if not path.exists():
            raise FileNotFoundError(f"model directory not found: {path}")
        self.model = GPT2LMHeadModel.from_pretrained(path).to(device).eval()
        self.device = device
        config = self.model.config
        self.eos_id = int(config.eos_token_id)
        if self.eos_id != config.vocab_size - 1:
            raise ValueError("expected the eos id to be the model's last id")
        self.vocab_size = self.eos_id  # text ids only; eos stays virtual
        self.max_positions = int(config.n_positions)
        self.model_id = model_id or path.name
        # Emission mask: byte-level greedy output must stay decodable, so
        # generation (and scoring, consistently) renormalizes over
        # printable ASCII, newline, and eos.
        mask = torch.full((config.vocab_size,), float("-inf"))
        for i in _ALLOWED_BYTES:
            mask[i] = 0.0
        mask[self.eos_id] = 0.0
        self._mask = mask.to(device)

    def describe(self) -> dict:
        return {
            "model_id": self.model_id,
            "tokenizer_category": "opaque",
            "vocab_size": self.vocab_size,
        }

    @torch.inference_mode()
    def next_logprobs(self, ids: list[int]) -> torch.Tensor:
        """Log distribution over the next id given ``ids``.

        The context is re-run in full on every call; with the toy model
        sizes this costs less than managing key-value caches and keeps
        generation and scoring numerically identical by construction.
        """
        if not ids:
            raise SessionFault("bad_request", "cannot score from an empty context")
        if len(ids) >= self.max_positions:
            raise SessionFault(
                "bad_request",
                f"context of {len(ids)} ids exceeds the model window")
        x = torch.tensor([ids], dtype=torch.long, device=self.device)
        logits = self.model(input_ids=x).logits[0, -1]
        return torch.log_softmax(logits + self._mask, dim=-1)


class ModelSession:
    """One generation context; all operations serialize on the lock."""

    def __init__(self, served: ServedModel, prompt: str):
        self.served = served
        self.ids: list[int] = list(prompt.encode("utf-8"))
        self.finished = False
        self.lock = threading.RLock()
        self._decoder = codecs.getincrementaldecoder("utf-8")()

    def next_tokens(self, n: int) -> dict:
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise SessionFault("bad_request", "n must be a positive integer")
        with self.lock:
            tokens: list[int] = []
            nlls: list[float] = []
            text_parts: list[str] = []
            eos = self.finished
            for _ in range(n):
                if self.finished:
                    eos = True
                    break
                # The position window ending is the model's way of
                # running out of things to say; report it as eos.
                if len(self.ids) + 1 >= self.served.max_positions:
                    self.finished = True
                    eos = True
                    break
                logprobs = self.served.next_logprobs(self.ids)
                token = int(torch.argmax(logprobs).item())
                if token == self.served.eos_id:
                    self.finished = True
                    eos = True
                    break
                tokens.append(token)
                nlls.append(float(-logprobs[token].item()))
                self.ids.append(token)
                flushed = self._decoder.decode(bytes([token]))
                if flushed:
                    text_parts.append(flushed)
            return {
                "tokens": tokens,
                "nlls": nlls,
                "texts_incremental": "".join(text_parts),
                "eos": eos,
            }

    def score(self, text: str) -> dict:
        if text == "":
            raise SessionFault("empty_segment", "cannot score empty text")
        continuation = list(text.encode("utf-8"))
        with self.lock:
            context = list(self.ids)
            total = 0.0
            for token in continuation:
                logprobs = self.served.next_logprobs(context)
                total += float(-logprobs[token].item())
                context.append(token)
        return {"nll_sum": total, "token_count": len(continuation)}

    def append(self, text: str) -> None:
        with self.lock:
            if self.finished:
                raise SessionFault("session_finished", "context already hit eos")
            if text == "":
                return
            self.ids.extend(text.encode("utf-8"))
            # Appended text is already complete characters; any dangling
            # generated bytes are out of flush order now, so drop them.
            self._decoder.reset()

    def fork(self) -> "ModelSession":
        with self.lock:
            clone = ModelSession.__new__(ModelSession)
            clone.served = self.served
            clone.ids = list(self.ids)
            clone.finished = self.finished
            clone.lock = threading.RLock()
            clone._decoder = codecs.getincrementaldecoder("utf-8")()
            clone._decoder.setstate(self._decoder.getstate())
            return clone

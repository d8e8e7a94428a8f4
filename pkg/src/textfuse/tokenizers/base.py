"""Tokenizer abstraction over heterogeneous vocabularies.

Three boundary-information categories are distinguished: tokenizers that
can map decoded text to an ordered word list (WORD_IDS), tokenizers that
expose per-token character offsets (CHAR_OFFSETS), and tokenizers that
guarantee only encode/decode (OPAQUE).

Decodability is defined by the roundtrip predicate: a token sequence is
decodable iff re-encoding its decoded text reproduces the sequence,
byte-exactly.  ``decode`` returns None for sequences that fail it; that
is an ordinary value, not a fault.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

from ..errors import UnsupportedCategory


class TokenizerCategory(Enum):
    WORD_IDS = "word_ids"
    CHAR_OFFSETS = "char_offsets"
    OPAQUE = "opaque"


@dataclass(frozen=True)
class TokenSeq:
    """Immutable sequence of token ids owned by one tokenizer."""

    ids: tuple[int, ...]
    tokenizer_id: str

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        if any(i < 0 for i in self.ids):
            raise ValueError("token ids must be non-negative")

    def __len__(self) -> int:
        return len(self.ids)

    def __add__(self, other: "TokenSeq") -> "TokenSeq":
        if other.tokenizer_id != self.tokenizer_id:
            raise ValueError("cannot concatenate token sequences from different tokenizers")
        return TokenSeq(self.ids + other.ids, self.tokenizer_id)


@dataclass(frozen=True)
class CodecWindow:
    """Number of trailing context words retained for incremental codecs."""

    k: int = 4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("codec window k must be >= 1")


class WordSpan(NamedTuple):
    text: str
    first_token: int
    last_token: int  # inclusive


# A "word" for codec purposes is a maximal non-space run with its leading
# whitespace attached; trailing whitespace sticks to the final word so the
# pieces always concatenate back to the original text.
_WORD_RE = re.compile(r"\s*\S+")


def split_words(text: str) -> list[str]:
    pieces = _WORD_RE.findall(text)
    covered = sum(len(p) for p in pieces)
    if covered < len(text):
        tail = text[covered:]
        if pieces:
            pieces[-1] += tail
        elif tail:
            pieces = [tail]
    return pieces


class Tokenizer(ABC):
    """Immutable after construction; all operations are pure."""

    tokenizer_id: str
    category: TokenizerCategory

    @property
    @abstractmethod
    def vocab_size(self) -> int: ...

    @abstractmethod
    def token_strings(self) -> frozenset[str]:
        """Native piece strings, for vocabulary-overlap diagnostics."""

    @abstractmethod
    def encode(self, text: str) -> TokenSeq:
        """Canonical encoding of ``text``; raises EncodingFailure."""

    @abstractmethod
    def raw_decode(self, ids: Sequence[int]) -> Optional[str]:
        """Native decode without the roundtrip check.

        Returns None when the ids have no native text at all (for
        example a dangling UTF-8 prefix).
        """

    def decode(self, tokens: TokenSeq) -> Optional[str]:
        """Decoded text if the sequence passes the roundtrip test, else None."""
        self._check_owner(tokens)
        text = self.raw_decode(tokens.ids)
        if text is None:
            return None
        try:
            again = self.encode(text)
        except Exception:
            return None
        return text if again.ids == tokens.ids else None

    def is_decodable(self, tokens: TokenSeq) -> bool:
        return self.decode(tokens) is not None

    def roundtrips_text(self, text: str) -> bool:
        """True iff ``text`` survives encode-then-decode byte-exactly."""
        try:
            ids = self.encode(text)
        except Exception:
            return False
        return self.raw_decode(ids.ids) == text

    def word_boundaries(self, tokens: TokenSeq) -> list[WordSpan]:
        """Ordered words with their (inclusive) token index ranges.

        The word texts concatenate to the decoded text and the token
        ranges partition the sequence.  Only WORD_IDS and CHAR_OFFSETS
        tokenizers support this.
        """
        self._check_owner(tokens)
        if self.category is TokenizerCategory.OPAQUE:
            raise UnsupportedCategory(f"{self.tokenizer_id} exposes no word boundaries")
        return self._word_boundaries(tokens)

    def _word_boundaries(self, tokens: TokenSeq) -> list[WordSpan]:
        raise UnsupportedCategory(self.tokenizer_id)

    def seq(self, ids: Sequence[int]) -> TokenSeq:
        return TokenSeq(tuple(ids), self.tokenizer_id)

    def _check_owner(self, tokens: TokenSeq) -> None:
        if tokens.tokenizer_id != self.tokenizer_id:
            raise ValueError(
                f"token sequence belongs to {tokens.tokenizer_id!r}, not {self.tokenizer_id!r}"
            )

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.tokenizer_id} {self.category.value} V={self.vocab_size}>"

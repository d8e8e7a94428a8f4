"""The four in-repo toy tokenizers.

One per boundary category, plus a position-sensitive variant:

* ``WordTokenizer`` (WORD_IDS) splits text into words the way modern
  byte-level BPE pretokenizers do (punctuation prefixes attach to the
  following letters, so "Multi-tasking" is two words) and covers each
  word with vocabulary pieces.
* ``BpeTokenizer`` (CHAR_OFFSETS) splits on whitespace only
  ("Multi-tasking" stays one word) and runs ranked pair merges inside
  each word; every token knows its character offsets.
* ``ByteTokenizer`` (OPAQUE) maps text to raw UTF-8 bytes; dangling
  multi-byte prefixes are not decodable.
* ``PrefixSpaceTokenizer`` (OPAQUE) uses a word-start marker and strips
  one marker when a sequence is decoded from position zero, so the same
  token decodes to "If" at the start and " If" elsewhere.
"""

from __future__ import annotations

import re
from typing import Optional, Sequence

from .._kernels import apply_bpe_merges, greedy_longest_match
from ..errors import EncodingFailure
from .base import Tokenizer, TokenizerCategory, TokenSeq, WordSpan, split_words

# Word-start marker for the position-sensitive tokenizer (U+2581).
MARKER = "▁"

# Pretokenizer for WordTokenizer: a word is letters/digits with at most one
# attached punctuation prefix, or a bare punctuation run; leading whitespace
# sticks to the word.
_PRETOKEN_RE = re.compile(r"\s*(?:[^\w\s]?\w+|[^\w\s]+)")


def pretokenize_words(text: str) -> list[str]:
    return _PRETOKEN_RE.findall(text)


class WordTokenizer(Tokenizer):
    category = TokenizerCategory.WORD_IDS

    def __init__(self, tokenizer_id: str, vocab: Sequence[str]):
        self.tokenizer_id = tokenizer_id
        self._pieces = list(vocab)
        self._piece_set = frozenset(self._pieces)
        if len(self._piece_set) != len(self._pieces):
            raise ValueError("duplicate vocabulary pieces")
        self._piece_to_id = {p: i for i, p in enumerate(self._pieces)}
        self._max_len = max((len(p) for p in self._pieces), default=0)

    @property
    def vocab_size(self) -> int:
        return len(self._pieces)

    def token_strings(self) -> frozenset[str]:
        return self._piece_set

    def encode(self, text: str) -> TokenSeq:
        if not text:
            return self.seq(())
        words = pretokenize_words(text)
        if sum(len(w) for w in words) != len(text):
            raise EncodingFailure(
                f"{self.tokenizer_id}: text has material outside word pretokens: {text!r}"
            )
        ids: list[int] = []
        for word in words:
            pieces = greedy_longest_match(word, self._piece_set, self._max_len)
            if pieces is None:
                raise EncodingFailure(f"{self.tokenizer_id}: cannot cover word {word!r}")
            ids.extend(self._piece_to_id[p] for p in pieces)
        return self.seq(ids)

    def raw_decode(self, ids: Sequence[int]) -> Optional[str]:
        return "".join(self._pieces[self._check_id(i)] for i in ids)

    def _word_boundaries(self, tokens: TokenSeq) -> list[WordSpan]:
        text = self.raw_decode(tokens.ids)
        assert text is not None
        spans: list[WordSpan] = []
        idx = 0
        for word in pretokenize_words(text):
            first = idx
            acc = ""
            while len(acc) < len(word):
                if idx >= len(tokens.ids):
                    raise ValueError("tokens do not align with word pretokens")
                acc += self._pieces[tokens.ids[idx]]
                idx += 1
            if acc != word:
                raise ValueError("token boundaries straddle a word boundary")
            spans.append(WordSpan(word, first, idx - 1))
        if idx != len(tokens.ids):
            raise ValueError("trailing tokens outside any word")
        return spans

    def _check_id(self, i: int) -> int:
        if not 0 <= i < len(self._pieces):
            raise ValueError(f"token id {i} out of range for {self.tokenizer_id}")
        return i


class BpeTokenizer(Tokenizer):
    category = TokenizerCategory.CHAR_OFFSETS

    def __init__(self, tokenizer_id: str, vocab: Sequence[str], merges: Sequence[Sequence[str]]):
        self.tokenizer_id = tokenizer_id
        self._pieces = list(vocab)
        self._piece_to_id = {p: i for i, p in enumerate(self._pieces)}
        if len(self._piece_to_id) != len(self._pieces):
            raise ValueError("duplicate vocabulary pieces")
        self._char_ids = {p: i for i, p in enumerate(self._pieces) if len(p) == 1}
        self._pair_rank: dict[tuple[int, int], int] = {}
        self._pair_result: dict[tuple[int, int], int] = {}
        for rank, (left, right) in enumerate(merges):
            merged = left + right
            for part in (left, right, merged):
                if part not in self._piece_to_id:
                    raise ValueError(f"merge references unknown piece {part!r}")
            key = (self._piece_to_id[left], self._piece_to_id[right])
            self._pair_rank[key] = rank
            self._pair_result[key] = self._piece_to_id[merged]

    @property
    def vocab_size(self) -> int:
        return len(self._pieces)

    def token_strings(self) -> frozenset[str]:
        return frozenset(self._pieces)

    def encode(self, text: str) -> TokenSeq:
        ids: list[int] = []
        for word in split_words(text):
            try:
                symbols = [self._char_ids[c] for c in word]
            except KeyError as exc:
                raise EncodingFailure(
                    f"{self.tokenizer_id}: character {exc.args[0]!r} not in alphabet"
                ) from None
            ids.extend(apply_bpe_merges(symbols, self._pair_rank, self._pair_result))
        return self.seq(ids)

    def raw_decode(self, ids: Sequence[int]) -> Optional[str]:
        return "".join(self._pieces[self._check_id(i)] for i in ids)

    def offsets(self, tokens: TokenSeq) -> list[tuple[int, int]]:
        """Half-open character range of each token in the decoded text."""
        self._check_owner(tokens)
        out = []
        pos = 0
        for i in tokens.ids:
            piece = self._pieces[self._check_id(i)]
            out.append((pos, pos + len(piece)))
            pos += len(piece)
        return out

    def _word_boundaries(self, tokens: TokenSeq) -> list[WordSpan]:
        text = self.raw_decode(tokens.ids)
        assert text is not None
        offs = self.offsets(tokens)
        spans: list[WordSpan] = []
        idx = 0
        pos = 0
        for word in split_words(text):
            first = idx
            end = pos + len(word)
            while idx < len(offs) and offs[idx][1] <= end:
                idx += 1
            if idx == first or offs[idx - 1][1] != end:
                raise ValueError("token boundaries straddle a word boundary")
            spans.append(WordSpan(word, first, idx - 1))
            pos = end
        if idx != len(tokens.ids):
            raise ValueError("trailing tokens outside any word")
        return spans

    def _check_id(self, i: int) -> int:
        if not 0 <= i < len(self._pieces):
            raise ValueError(f"token id {i} out of range for {self.tokenizer_id}")
        return i


class ByteTokenizer(Tokenizer):
    category = TokenizerCategory.OPAQUE

    def __init__(self, tokenizer_id: str):
        self.tokenizer_id = tokenizer_id

    @property
    def vocab_size(self) -> int:
        return 256

    def token_strings(self) -> frozenset[str]:
        return frozenset(chr(i) for i in range(256))

    def encode(self, text: str) -> TokenSeq:
        return self.seq(text.encode("utf-8"))

    def raw_decode(self, ids: Sequence[int]) -> Optional[str]:
        for i in ids:
            if not 0 <= i < 256:
                raise ValueError(f"token id {i} out of range for {self.tokenizer_id}")
        try:
            return bytes(ids).decode("utf-8")
        except UnicodeDecodeError:
            return None


class PrefixSpaceTokenizer(Tokenizer):
    category = TokenizerCategory.OPAQUE

    def __init__(self, tokenizer_id: str, vocab: Sequence[str]):
        self.tokenizer_id = tokenizer_id
        self._pieces = list(vocab)
        self._piece_set = frozenset(self._pieces)
        if len(self._piece_set) != len(self._pieces):
            raise ValueError("duplicate vocabulary pieces")
        self._piece_to_id = {p: i for i, p in enumerate(self._pieces)}
        self._max_len = max((len(p) for p in self._pieces), default=0)

    @property
    def vocab_size(self) -> int:
        return len(self._pieces)

    def token_strings(self) -> frozenset[str]:
        return self._piece_set

    def encode(self, text: str) -> TokenSeq:
        if not text:
            return self.seq(())
        if MARKER in text:
            raise EncodingFailure(f"{self.tokenizer_id}: text contains the word-start marker")
        normalized = MARKER + text.replace(" ", MARKER)
        pieces = greedy_longest_match(normalized, self._piece_set, self._max_len)
        if pieces is None:
            raise EncodingFailure(f"{self.tokenizer_id}: cannot cover text {text!r}")
        return self.seq(self._piece_to_id[p] for p in pieces)

    def raw_decode(self, ids: Sequence[int]) -> Optional[str]:
        s = "".join(self._pieces[self._check_id(i)] for i in ids)
        if s.startswith(MARKER):
            s = s[1:]
        return s.replace(MARKER, " ")

    def _check_id(self, i: int) -> int:
        if not 0 <= i < len(self._pieces):
            raise ValueError(f"token id {i} out of range for {self.tokenizer_id}")
        return i

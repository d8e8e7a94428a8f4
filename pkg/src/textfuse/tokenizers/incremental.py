"""Incremental encoding and decoding with a bounded word window.

Re-running a tokenizer over a whole growing context costs linear work
per step and, worse, position-sensitive tokenizers decode a token
differently depending on what precedes it.  Both operations here
therefore prepend only the tokens (or text) of the last ``k`` decoded
context words, convert, and strip that prefix off the result again.
With a sufficient window the outcome equals the full-context
conversion at constant cost; the default window of four words is
enough for every shipped tokenizer.
"""

from __future__ import annotations

from ..errors import WindowMismatch
from .base import CodecWindow, Tokenizer, TokenSeq, split_words


def _tail_matches(tail_text: str, expected: str) -> bool:
    # A standalone decode treats the tail as sequence start, which may strip
    # one leading space off the first context word.
    if tail_text == expected:
        return True
    return expected[:1] == " " and tail_text == expected[1:]


def decode_incremental(
    tokenizer: Tokenizer,
    prev_words: list[str],
    prev_tail_tokens: TokenSeq,
    new_tokens: TokenSeq,
    window: CodecWindow = CodecWindow(),
):
    """Text the new tokens contribute after the existing context.

    Returns None while the combined tail is not decodable (for example a
    dangling multi-byte prefix); raises WindowMismatch if the supplied
    tail tokens do not decode to the supplied words.
    """
    if len(prev_words) > window.k:
        raise WindowMismatch(f"{len(prev_words)} context words exceed window k={window.k}")
    expected = "".join(prev_words)
    tail_text = tokenizer.raw_decode(prev_tail_tokens.ids) if prev_tail_tokens.ids else ""
    if tail_text is None or not _tail_matches(tail_text, expected):
        raise WindowMismatch(
            f"context tail decodes to {tail_text!r}, expected {expected!r}"
        )
    combined = tokenizer.decode(prev_tail_tokens + new_tokens)
    if combined is None:
        return None
    if not combined.startswith(tail_text):
        raise WindowMismatch("new tokens altered the decoded context tail")
    return combined[len(tail_text):]


def encode_incremental(
    tokenizer: Tokenizer,
    prev_words: list[str],
    new_text: str,
    window: CodecWindow = CodecWindow(),
) -> TokenSeq:
    """Tokens the new text contributes after the existing context.

    Raises WindowMismatch when the new text merges into the context tail
    (the token suffix then has no context-free representation).
    """
    if len(prev_words) > window.k:
        raise WindowMismatch(f"{len(prev_words)} context words exceed window k={window.k}")
    joined = "".join(prev_words)
    combined = tokenizer.encode(joined + new_text)
    prefix = tokenizer.encode(joined)
    n = len(prefix.ids)
    if combined.ids[:n] != prefix.ids:
        raise WindowMismatch(
            f"text {new_text!r} merges into the context tail under {tokenizer.tokenizer_id}"
        )
    return tokenizer.seq(combined.ids[n:])


def context_tail(
    tokenizer: Tokenizer,
    context_text: str,
    context_ids,
    window: CodecWindow = CodecWindow(),
) -> tuple[list[str], TokenSeq]:
    """Last ``<= k`` words of the context and the token suffix producing them.

    The suffix is found by scanning increasing token suffixes until one
    decodes to the expected words; token boundaries align with word
    boundaries for every shipped tokenizer, so a match always exists.
    """
    words = split_words(context_text)
    tail_words = words[-window.k:]
    if not tail_words:
        return [], tokenizer.seq(())
    expected = "".join(tail_words)
    ids = tuple(context_ids)
    for j in range(1, len(ids) + 1):
        tail_text = tokenizer.raw_decode(ids[-j:])
        if tail_text is None:
            continue
        if _tail_matches(tail_text, expected):
            return tail_words, tokenizer.seq(ids[-j:])
        if len(tail_text) > len(expected) + 1:
            break
    raise WindowMismatch(
        f"no token suffix of the context decodes to the last {len(tail_words)} words"
    )

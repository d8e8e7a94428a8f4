"""Tokenizer definitions load from JSON vocabulary files.

Schema::

    {
      "id": "optional tokenizer id (defaults to the file stem)",
      "kind": "word | bpe | byte | prefix_space",
      "category": "word_ids | char_offsets | opaque",
      "vocab": ["piece", ...],
      "merges": [["left", "right"], ...]
    }

Paths of the form ``pkg:name.json`` resolve against the vocabularies
shipped inside the package.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from .base import Tokenizer, TokenizerCategory
from .toy import BpeTokenizer, ByteTokenizer, PrefixSpaceTokenizer, WordTokenizer

_KIND_CATEGORY = {
    "word": TokenizerCategory.WORD_IDS,
    "bpe": TokenizerCategory.CHAR_OFFSETS,
    "byte": TokenizerCategory.OPAQUE,
    "prefix_space": TokenizerCategory.OPAQUE,
}


def _read_spec(path: str) -> tuple[dict, str]:
    if path.startswith("pkg:"):
        name = path[len("pkg:"):]
        data = resources.files("textfuse.data").joinpath(name).read_text("utf-8")
        stem = Path(name).stem
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"tokenizer file not found: {path}")
        data = p.read_text("utf-8")
        stem = p.stem
    try:
        return json.loads(data), stem
    except json.JSONDecodeError as exc:
        raise ConfigError(f"tokenizer file {path} is not valid JSON: {exc}") from None


def load_tokenizer(path: str) -> Tokenizer:
    spec, stem = _read_spec(path)
    kind = spec.get("kind")
    if kind not in _KIND_CATEGORY:
        raise ConfigError(f"tokenizer file {path}: unknown or missing kind {kind!r}")
    declared = spec.get("category")
    if declared is not None and declared != _KIND_CATEGORY[kind].value:
        raise ConfigError(
            f"tokenizer file {path}: category {declared!r} does not match kind {kind!r}"
        )
    tokenizer_id = spec.get("id", stem)
    vocab = spec.get("vocab", [])
    merges = spec.get("merges", [])
    if kind == "word":
        return WordTokenizer(tokenizer_id, vocab)
    if kind == "bpe":
        return BpeTokenizer(tokenizer_id, vocab, merges)
    if kind == "byte":
        return ByteTokenizer(tokenizer_id)
    return PrefixSpaceTokenizer(tokenizer_id, vocab)


def dump_tokenizer_spec(kind: str, vocab, merges=(), tokenizer_id=None) -> dict:
    """Build a JSON-serializable tokenizer spec (used by the vocab generator)."""
    if kind not in _KIND_CATEGORY:
        raise ValueError(f"unknown kind {kind!r}")
    spec = {
        "kind": kind,
        "category": _KIND_CATEGORY[kind].value,
        "vocab": list(vocab),
        "merges": [list(m) for m in merges],
    }
    if tokenizer_id:
        spec["id"] = tokenizer_id
    return spec

#!/usr/bin/env python3
"""Regenerate the vocabulary and corpus files under src/textfuse/data/.

Everything here is deterministic: rerunning the script reproduces the
shipped files byte for byte.  The word list is prefix-free (no word is
a strict prefix of another) so that greedy longest-match tokenization
never hides a shorter in-vocabulary word inside a longer one, which the
segment-minimality guarantees rely on.
"""

from __future__ import annotations

import json
import sys
from collections import Counter
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from textfuse.tokenizers import load_tokenizer, split_words  # noqa: E402
from textfuse.tokenizers.loaders import dump_tokenizer_spec  # noqa: E402

DATA = ROOT / "src" / "textfuse" / "data"

# "the" first: id 0 should decode to a well-formed word so that a model
# in an unseen context (uniform distribution, argmax id 0) still emits
# segments other models can score.
WORDS = [
    "the", "is", "and", "very", "near", "over", "under",
    "sky", "grass", "snow", "sun", "moon", "lake", "hill",
    "crow", "fox", "wolf", "rose", "leaf", "cat", "dog", "bird", "fish",
    "blue", "green", "white", "bright", "pale", "deep", "steep",
    "black", "red", "gray", "pink", "small",
    "runs", "jumps", "swims", "flies", "rests", "fast", "slow",
    ".",
]

DEMO_LINES = [
    "the cat runs fast .",
    "the dog is slow .",
    "the bird flies over the lake .",
    "the fish swims under the hill .",
    "the sun is bright .",
    "the sky is blue .",
    "the moon is pale .",
    "the cat jumps over the dog .",
    "the wolf runs near the hill .",
    "the fox rests under the leaf .",
    "the crow flies over the snow .",
    "the rose is red .",
    "the grass is green .",
    "the snow is white .",
    "the lake is deep .",
    "the hill is steep .",
]

# Complementary fact halves: every subject appears in exactly one file,
# so a model trained on one half cannot answer questions about the
# other and cross-model selection has to do real work.
LEFT_LINES = [
    "the sky is blue .",
    "the grass is green .",
    "the snow is white .",
    "the sun is bright .",
    "the rose is red .",
    "the lake is deep .",
]

RIGHT_LINES = [
    "the moon is pale .",
    "the crow is black .",
    "the hill is steep .",
    "the wolf is gray .",
    "the leaf is green .",
    "the fox is small .",
]

FALLBACK_CHARS = list("abcdefghijklmnopqrstuvwxyz") + \
    list("ABCDEFGHIJKLMNOPQRSTUVWXYZ") + list(".,!?'-")


def check_prefix_free(words):
    for a in words:
        for b in words:
            if a != b and b.startswith(a):
                raise SystemExit(f"word list is not prefix-free: {a!r} < {b!r}")


def train_bpe(lines, n_merges):
    """Tiny frequency-based pair-merge trainer; ties break on the
    lexicographically smallest pair for determinism."""
    word_freq = Counter()
    for line in lines:
        for word in split_words(line):
            word_freq[word] += 1
    alphabet = sorted({c for word in word_freq for c in word})
    symbols = {word: list(word) for word in word_freq}
    merges = []
    for _ in range(n_merges):
        pair_counts = Counter()
        for word, freq in word_freq.items():
            parts = symbols[word]
            for pair in zip(parts, parts[1:]):
                pair_counts[pair] += freq
        if not pair_counts:
            break
        best = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        if pair_counts[best] < 2:
            break
        merges.append(best)
        for word, parts in symbols.items():
            out = []
            i = 0
            while i < len(parts):
                if i + 1 < len(parts) and (parts[i], parts[i + 1]) == best:
                    out.append(parts[i] + parts[i + 1])
                    i += 2
                else:
                    out.append(parts[i])
                    i += 1
            symbols[word] = out
    vocab = list(alphabet)
    seen = set(vocab)
    for left, right in merges:
        merged = left + right
        if merged not in seen:
            vocab.append(merged)
            seen.add(merged)
    return vocab, [list(m) for m in merges]


def build_specs():
    word_vocab = []
    for word in WORDS:
        word_vocab.append(" " + word)
        word_vocab.append(word)

    all_lines = DEMO_LINES + LEFT_LINES + RIGHT_LINES
    bpe_vocab, bpe_merges = train_bpe(all_lines, 60)

    prefix_vocab = ["▁" + word for word in WORDS]
    prefix_vocab.append("▁")
    prefix_vocab.extend(FALLBACK_CHARS)

    return {
        "vocab_word.json": dump_tokenizer_spec("word", word_vocab),
        "vocab_bpe.json": dump_tokenizer_spec("bpe", bpe_vocab, bpe_merges),
        "vocab_byte.json": dump_tokenizer_spec("byte", []),
        "vocab_prefix_space.json": dump_tokenizer_spec("prefix_space", prefix_vocab),
    }


def verify(corpora):
    tokenizers = [load_tokenizer(f"pkg:{name}") for name in (
        "vocab_word.json", "vocab_bpe.json", "vocab_byte.json",
        "vocab_prefix_space.json")]
    for lines in corpora:
        for line in lines:
            for tok in tokenizers:
                ids = tok.encode(line)
                assert tok.decode(ids) == line, (tok.tokenizer_id, line)


def main():
    check_prefix_free(WORDS)
    DATA.mkdir(parents=True, exist_ok=True)
    for name, spec in build_specs().items():
        path = DATA / name
        path.write_text(json.dumps(spec, ensure_ascii=False, indent=1,
                                   sort_keys=True) + "\n", "utf-8")
        print(f"wrote {path.relative_to(ROOT)}")
    for name, lines in [
        ("corpus_demo.txt", DEMO_LINES),
        ("corpus_left.txt", LEFT_LINES),
        ("corpus_right.txt", RIGHT_LINES),
    ]:
        path = DATA / name
        path.write_text("\n".join(lines) + "\n", "utf-8")
        print(f"wrote {path.relative_to(ROOT)}")
    verify([DEMO_LINES, LEFT_LINES, RIGHT_LINES])
    print("all corpus lines roundtrip under all four tokenizers")


if __name__ == "__main__":
    main()

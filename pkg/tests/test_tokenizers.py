"""Tokenizer layer: roundtrips, boundary categories, loaders."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textfuse.errors import ConfigError, EncodingFailure, UnsupportedCategory
from textfuse.tokenizers import (
    TokenizerCategory,
    load_tokenizer,
    split_words,
    vocab_overlap,
)
from textfuse.tokenizers.toy import (
    BpeTokenizer,
    ByteTokenizer,
    PrefixSpaceTokenizer,
    WordTokenizer,
    pretokenize_words,
)

WORD_SOUP = ["the", "sky", "is", "blue", "grass", "green", "cat", "runs", "."]


def soup(seed, n_words=6):
    rng = random.Random(seed)
    return " ".join(rng.choice(WORD_SOUP) for _ in range(rng.randint(1, n_words)))


# -- split styles ----------------------------------------------------------


def test_pretokenizer_attaches_punctuation_prefix():
    assert pretokenize_words(" Multi-tasking") == [" Multi", "-tasking"]
    assert pretokenize_words("the cat .") == ["the", " cat", " ."]


def test_whitespace_split_keeps_hyphenated_words_whole():
    assert split_words(" Multi-tasking") == [" Multi-tasking"]
    assert split_words("a b  ") == ["a", " b  "]
    assert split_words("   ") == ["   "]
    assert split_words("") == []


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=40))
def test_split_words_rejoins_exactly(text):
    assert "".join(split_words(text)) == text


# -- per-tokenizer behavior ------------------------------------------------


def test_word_tokenizer_boundaries_split_hyphen_compound():
    tok = WordTokenizer("t", [" Multi", "-tasking", "Multi", " Mul", "ti"])
    seq = tok.encode(" Multi-tasking")
    spans = tok.word_boundaries(seq)
    assert [s.text for s in spans] == [" Multi", "-tasking"]
    assert [(s.first_token, s.last_token) for s in spans] == [(0, 0), (1, 1)]


def test_word_tokenizer_multi_piece_words():
    tok = WordTokenizer("t", [" Mul", "ti", " Multi"])
    # Greedy prefers the longest piece.
    assert tok.encode(" Multi").ids == (2,)
    tok2 = WordTokenizer("t2", [" Mul", "ti"])
    seq = tok2.encode(" Multi")
    assert seq.ids == (0, 1)
    spans = tok2.word_boundaries(seq)
    assert [(s.text, s.first_token, s.last_token) for s in spans] == [(" Multi", 0, 1)]


def test_word_tokenizer_rejects_uncovered_text():
    tok = WordTokenizer("t", ["the", " cat"])
    with pytest.raises(EncodingFailure):
        tok.encode("the dog")
    with pytest.raises(EncodingFailure):
        tok.encode("the cat ")  # trailing space is not part of any word


def test_bpe_tokenizer_applies_ranked_merges():
    tok = BpeTokenizer("t", ["a", "b", "c", "ab", "abc"], [["a", "b"], ["ab", "c"]])
    assert tok.encode("abc").ids == (4,)
    assert tok.encode("ab").ids == (3,)
    assert tok.encode("ba").ids == (1, 0)


def test_bpe_offsets_are_half_open_char_ranges(bpe_tok):
    seq = bpe_tok.encode("the sky")
    offs = bpe_tok.offsets(seq)
    assert offs[0][0] == 0
    assert offs[-1][1] == len("the sky")
    for (a, b), (c, d) in zip(offs, offs[1:]):
        assert b == c and a < b and c < d


def test_bpe_word_boundaries_keep_compounds_whole(bpe_tok):
    seq = bpe_tok.encode("the sky is")
    spans = bpe_tok.word_boundaries(seq)
    assert [s.text for s in spans] == ["the", " sky", " is"]


def test_bpe_rejects_unknown_merge_pieces():
    with pytest.raises(ValueError):
        BpeTokenizer("t", ["a", "b"], [["a", "z"]])


def test_byte_tokenizer_multibyte_char(byte_tok):
    seq = byte_tok.encode("中")
    assert seq.ids == (228, 184, 173)
    assert byte_tok.decode(seq) == "中"
    # Dangling prefixes of a multi-byte char never decode.
    assert byte_tok.decode(byte_tok.seq(seq.ids[:1])) is None
    assert byte_tok.decode(byte_tok.seq(seq.ids[:2])) is None


def test_byte_tokenizer_category_has_no_word_boundaries(byte_tok):
    with pytest.raises(UnsupportedCategory):
        byte_tok.word_boundaries(byte_tok.encode("hi"))


def test_prefix_space_position_sensitivity():
    tok = PrefixSpaceTokenizer("t", ["▁If", "▁", "I", "f"])
    start = tok.encode("If")
    assert start.ids == (0,)
    assert tok.raw_decode(start.ids) == "If"
    mid = tok.encode(" If")
    assert mid.ids == (1, 0)
    assert tok.raw_decode(mid.ids) == " If"
    # The same token means "If" at position zero and " If" later on.
    assert tok.raw_decode([0, 0]) == "If If"


def test_prefix_space_rejects_marker_in_text(prefix_tok):
    with pytest.raises(EncodingFailure):
        prefix_tok.encode("ab▁cd")


def test_roundtrip_gate_rejects_ambiguous_decodes():
    # Raw decode succeeds, but re-encoding merges the pieces differently,
    # so the roundtrip-gated decode must refuse.
    tok = WordTokenizer("t", [" s", "k", " sk"])
    seq = tok.seq([0, 1])
    assert tok.raw_decode(seq.ids) == " sk"
    assert tok.decode(seq) is None
    assert not tok.is_decodable(seq)


@pytest.mark.parametrize("seed", range(30))
def test_all_tokenizers_roundtrip_word_soup(all_tokenizers, seed):
    text = soup(seed)
    for tok in all_tokenizers:
        seq = tok.encode(text)
        assert tok.decode(seq) == text, tok.tokenizer_id
        assert tok.roundtrips_text(text)


def test_empty_text_encodes_to_nothing(all_tokenizers):
    for tok in all_tokenizers:
        assert len(tok.encode("")) == 0


# -- TokenSeq --------------------------------------------------------------


def test_token_seq_concat_requires_same_owner(word_tok, bpe_tok):
    a = word_tok.encode("the")
    b = word_tok.encode(" sky")
    assert (a + b).ids == a.ids + b.ids
    with pytest.raises(ValueError):
        a + bpe_tok.encode("the")


def test_token_seq_rejects_foreign_owner(word_tok, bpe_tok):
    seq = bpe_tok.encode("the")
    with pytest.raises(ValueError):
        word_tok.decode(seq)


# -- overlap ---------------------------------------------------------------


def test_vocab_overlap_counts_shared_token_strings():
    a = WordTokenizer("a", ["x", "y", "z"])
    b = WordTokenizer("b", ["y", "z", "w"])
    assert vocab_overlap(a, b) == pytest.approx(2 / 4)
    assert vocab_overlap(a, a) == 1.0


def test_shipped_vocabularies_barely_overlap(word_tok, prefix_tok):
    # Disjoint-vocabulary fusion is the whole point; the shipped pair
    # shares almost nothing.
    assert vocab_overlap(word_tok, prefix_tok) < 0.07


# -- loaders ---------------------------------------------------------------


def test_loader_reads_packaged_specs(all_tokenizers):
    cats = {t.tokenizer_id: t.category for t in all_tokenizers}
    assert cats["vocab_word"] is TokenizerCategory.WORD_IDS
    assert cats["vocab_bpe"] is TokenizerCategory.CHAR_OFFSETS
    assert cats["vocab_byte"] is TokenizerCategory.OPAQUE
    assert cats["vocab_prefix_space"] is TokenizerCategory.OPAQUE


def test_loader_rejects_unknown_kind(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "sentencepiece", "vocab": []}')
    with pytest.raises(ConfigError):
        load_tokenizer(str(p))


def test_loader_rejects_category_mismatch(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "word", "category": "opaque", "vocab": []}')
    with pytest.raises(ConfigError):
        load_tokenizer(str(p))


def test_loader_rejects_missing_file():
    with pytest.raises(ConfigError):
        load_tokenizer("/nonexistent/tok.json")


def test_loader_rejects_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_tokenizer(str(p))

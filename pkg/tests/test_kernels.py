"""The compiled kernels and the pure twins must be interchangeable."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textfuse._kernels import KERNEL_BACKEND, _pure

try:
    from textfuse._kernels import _core
except ImportError:
    _core = None

IMPLS = [pytest.param(_pure, id="pure")]
if _core is not None:
    IMPLS.append(pytest.param(_core, id="compiled"))


def naive_apply_merges(ids, pair_rank, pair_result):
    """Reference: repeatedly merge the lowest-ranked (leftmost on tie)
    adjacent pair until none applies."""
    out = list(ids)
    while True:
        best_rank, best_pos = None, None
        for pos in range(len(out) - 1):
            rank = pair_rank.get((out[pos], out[pos + 1]))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank, best_pos = rank, pos
        if best_pos is None:
            return out
        out[best_pos:best_pos + 2] = [pair_result[(out[best_pos], out[best_pos + 1])]]


def naive_longest_match(text, vocab, max_len):
    pieces = []
    pos = 0
    while pos < len(text):
        for ln in range(min(max_len, len(text) - pos), 0, -1):
            piece = text[pos:pos + ln]
            if piece in vocab:
                pieces.append(piece)
                pos += ln
                break
        else:
            return None
    return pieces


def random_merge_tables(rng, alphabet, n_merges):
    pair_rank, pair_result = {}, {}
    next_id = alphabet
    while len(pair_rank) < n_merges:
        pair = (rng.randrange(next_id), rng.randrange(next_id))
        if pair in pair_rank:
            continue
        pair_rank[pair] = len(pair_rank)
        pair_result[pair] = next_id
        next_id += 1
    return pair_rank, pair_result


@pytest.mark.parametrize("impl", IMPLS)
def test_merges_match_naive_reference(impl):
    rng = random.Random(7)
    pair_rank, pair_result = random_merge_tables(rng, alphabet=12, n_merges=30)
    for _ in range(300):
        ids = [rng.randrange(12) for _ in range(rng.randint(0, 40))]
        assert list(impl.apply_bpe_merges(ids, pair_rank, pair_result)) == \
            naive_apply_merges(ids, pair_rank, pair_result)


@pytest.mark.parametrize("impl", IMPLS)
def test_merges_prefer_lowest_rank_then_leftmost(impl):
    # Rank 0 consumes the middle symbol before rank 1 can; with the
    # priorities swapped the result would be [0, 3].
    pair_rank = {(1, 2): 1, (0, 1): 0}
    pair_result = {(1, 2): 3, (0, 1): 4}
    assert list(impl.apply_bpe_merges([0, 1, 2], pair_rank, pair_result)) == [4, 2]
    # Equal pairs merge leftmost first.
    pair_rank = {(0, 0): 0}
    pair_result = {(0, 0): 9}
    assert list(impl.apply_bpe_merges([0, 0, 0], pair_rank, pair_result)) == [9, 0]


@pytest.mark.parametrize("impl", IMPLS)
def test_longest_match_against_naive(impl):
    rng = random.Random(11)
    pool = ["a", "b", "ab", "ba", "aab", "bb", "abab"]
    vocab = frozenset(pool)
    for _ in range(300):
        text = "".join(rng.choice("ab") for _ in range(rng.randint(0, 24)))
        assert impl.greedy_longest_match(text, vocab, 4) == \
            naive_longest_match(text, vocab, 4)
    # Uncoverable text returns None, not an exception.
    assert impl.greedy_longest_match("ac", vocab, 4) is None
    assert impl.greedy_longest_match("", vocab, 4) == []


@pytest.mark.skipif(_core is None, reason="compiled kernels unavailable")
@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 9), max_size=50), st.integers(0, 2**31 - 1))
def test_pure_and_compiled_agree(ids, seed):
    rng = random.Random(seed)
    pair_rank, pair_result = random_merge_tables(rng, alphabet=10, n_merges=15)
    assert list(_core.apply_bpe_merges(ids, pair_rank, pair_result)) == \
        list(_pure.apply_bpe_merges(ids, pair_rank, pair_result))


def test_backend_selection_reports_something_real():
    assert KERNEL_BACKEND in ("pure", "compiled")
    if _core is not None:
        import os
        # Unless the escape hatch is set, the compiled path should win.
        if os.environ.get("TEXTFUSE_PURE_KERNELS") != "1":
            assert KERNEL_BACKEND == "compiled"

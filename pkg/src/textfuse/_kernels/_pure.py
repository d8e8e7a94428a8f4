"""Pure-Python twins of the compiled kernels.

Semantics must match ``_core.pyx`` exactly; the test suite runs both
implementations against each other when the extension is available.
"""

from __future__ import annotations


def apply_bpe_merges(ids, pair_rank, pair_result):
    """Collapse adjacent pairs by ascending merge rank until none apply.

    ``pair_rank`` maps an (id, id) pair to its priority (lower merges
    first); ``pair_result`` maps the same pair to the merged id.
    """
    ids = list(ids)
    while len(ids) > 1:
        best_rank = -1
        best_pos = -1
        for i in range(len(ids) - 1):
            rank = pair_rank.get((ids[i], ids[i + 1]), -1)
            if rank >= 0 and (best_rank < 0 or rank < best_rank):
                best_rank = rank
                best_pos = i
        if best_pos < 0:
            break
        ids[best_pos : best_pos + 2] = [pair_result[(ids[best_pos], ids[best_pos + 1])]]
    return ids


def greedy_longest_match(text, vocab, max_piece_len):
    """Split ``text`` into the longest vocabulary pieces, left to right.

    Returns a list of piece strings, or None if some position cannot be
    matched by any piece.
    """
    pieces = []
    pos = 0
    n = len(text)
    while pos < n:
        end = min(n, pos + max_piece_len)
        piece = None
        while end > pos:
            cand = text[pos:end]
            if cand in vocab:
                piece = cand
                break
            end -= 1
        if piece is None:
            return None
        pieces.append(piece)
        pos += len(piece)
    return pieces

# cython: boundscheck=False, wraparound=False
"""Compiled hot kernels: BPE pair merging and greedy longest-match.

Behavior is identical to ``_pure.py``; keep the two in lockstep.
"""


def apply_bpe_merges(ids, dict pair_rank, dict pair_result):
    cdef list out = list(ids)
    cdef Py_ssize_t i, n, best_pos
    cdef long best_rank, rank
    cdef object key, hit
    while True:
        n = len(out)
        if n < 2:
            break
        best_rank = -1
        best_pos = -1
        for i in range(n - 1):
            key = (out[i], out[i + 1])
            hit = pair_rank.get(key)
            if hit is not None:
                rank = hit
                if best_rank < 0 or rank < best_rank:
                    best_rank = rank
                    best_pos = i
        if best_pos < 0:
            break
        key = (out[best_pos], out[best_pos + 1])
        out[best_pos : best_pos + 2] = [pair_result[key]]
    return out


def greedy_longest_match(str text, vocab, Py_ssize_t max_piece_len):
    cdef list pieces = []
    cdef Py_ssize_t pos = 0, n = len(text), end
    cdef str cand
    cdef object piece
    while pos < n:
        end = pos + max_piece_len
        if end > n:
            end = n
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
        pos += len(<str>piece)
    return pieces

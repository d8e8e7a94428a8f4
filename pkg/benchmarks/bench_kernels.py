#!/usr/bin/env python3
"""Compare the compiled tokenizer kernels against the pure-Python twins.

Both implementations are exercised on identical synthetic workloads:
ranked pair merging over random id sequences and greedy longest-match
segmentation over random word-soup text.  Outputs are cross-checked
before timing, so the benchmark doubles as an equivalence spot check.

Run:  python3 benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import time
from importlib import import_module

from textfuse._kernels import _pure


def load_compiled():
    try:
        return import_module("textfuse._kernels._core")
    except ImportError:
        return None


def make_bpe_workload(rng: random.Random, n_seqs=400, seq_len=64, alphabet=40,
                      n_merges=120):
    pair_rank = {}
    pair_result = {}
    next_id = alphabet
    while len(pair_rank) < n_merges:
        pair = (rng.randrange(next_id), rng.randrange(next_id))
        if pair in pair_rank:
            continue
        pair_rank[pair] = len(pair_rank)
        pair_result[pair] = next_id
        next_id += 1
    seqs = [[rng.randrange(alphabet) for _ in range(seq_len)] for _ in range(n_seqs)]
    return seqs, pair_rank, pair_result


def make_match_workload(rng: random.Random, n_texts=400, words=60, text_words=24):
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    pool = sorted({
        "".join(rng.choice(alphabet) for _ in range(rng.randint(2, 8)))
        for _ in range(words)
    })
    vocab = frozenset(pool) | frozenset(alphabet) | {" "}
    texts = [
        " ".join(rng.choice(pool) for _ in range(text_words))
        for _ in range(n_texts)
    ]
    max_len = max(len(p) for p in vocab)
    return texts, vocab, max_len


def bench(label, fn, repeat):
    best = min(
        _timed(fn) for _ in range(repeat)
    )
    print(f"  {label:10s} {best * 1000:9.2f} ms")
    return best


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    compiled = load_compiled()
    if compiled is None:
        print("compiled kernels unavailable; run pip install -e . first")

    rng = random.Random(20240817)
    seqs, pair_rank, pair_result = make_bpe_workload(rng)
    texts, vocab, max_len = make_match_workload(rng)

    impls = [("pure", _pure)] + ([("compiled", compiled)] if compiled else [])

    # Equivalence before speed.
    for ids in seqs[:50]:
        expect = _pure.apply_bpe_merges(ids, pair_rank, pair_result)
        for name, mod in impls[1:]:
            got = mod.apply_bpe_merges(ids, pair_rank, pair_result)
            assert list(got) == list(expect), f"{name} diverges on merges"
    for text in texts[:50]:
        expect = _pure.greedy_longest_match(text, vocab, max_len)
        for name, mod in impls[1:]:
            got = mod.greedy_longest_match(text, vocab, max_len)
            assert got == expect, f"{name} diverges on matching"
    print(f"outputs identical across {len(impls)} implementation(s)\n")

    results = {}
    print("ranked pair merges:")
    for name, mod in impls:
        results[("bpe", name)] = bench(name, lambda m=mod: [
            m.apply_bpe_merges(ids, pair_rank, pair_result) for ids in seqs
        ], args.repeat)
    print("greedy longest match:")
    for name, mod in impls:
        results[("match", name)] = bench(name, lambda m=mod: [
            m.greedy_longest_match(text, vocab, max_len) for text in texts
        ], args.repeat)

    if compiled:
        for kind in ("bpe", "match"):
            ratio = results[(kind, "pure")] / results[(kind, "compiled")]
            print(f"{kind}: compiled is {ratio:.1f}x the pure speed")


if __name__ == "__main__":
    main()

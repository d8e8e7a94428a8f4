"""Deterministic miniature GPT-2 checkpoints for tests and demos.

The architecture is byte sized on purpose: 257 ids (256 byte values
plus a final end-of-sequence id), a short position window, and a couple
of narrow layers.  Weights are random but seeded, so a saved checkpoint
regenerates bit-identically.
"""

from __future__ import annotations

from pathlib import Path

import torch
from transformers import GPT2Config, GPT2LMHeadModel

EOS_ID = 256


def build_tiny_gpt2(path, seed: int = 0, n_positions: int = 160) -> Path:
    """Create and save an untrained byte-level model; returns the path."""
    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=EOS_ID + 1,
        n_positions=n_positions,
        n_embd=32,
        n_layer=2,
        n_head=2,
        eos_token_id=EOS_ID,
        bos_token_id=EOS_ID,
    )
    model = GPT2LMHeadModel(config)
    target = Path(path)
    model.save_pretrained(target)
    return target

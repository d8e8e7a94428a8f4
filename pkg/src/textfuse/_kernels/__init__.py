"""Kernel selection: compiled extension if importable, else pure Python.

Set TEXTFUSE_PURE_KERNELS=1 to force the fallback (used by the
benchmark and the equivalence tests).
"""

import os

if os.environ.get("TEXTFUSE_PURE_KERNELS") == "1":
    from ._pure import apply_bpe_merges, greedy_longest_match

    KERNEL_BACKEND = "pure"
else:
    try:
        from ._core import apply_bpe_merges, greedy_longest_match  # type: ignore[attr-defined]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        from ._pure import apply_bpe_merges, greedy_longest_match

        KERNEL_BACKEND = "pure"

__all__ = ["apply_bpe_merges", "greedy_longest_match", "KERNEL_BACKEND"]

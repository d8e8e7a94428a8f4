"""textfuse: joint text generation across models with disjoint vocabularies.

Heterogeneous language model backends take turns proposing short text
segments; every backend scores every proposal under its own tokenizer,
the lowest average perplexity wins, and the winning text extends all
contexts.  Plain text is the only interchange format, so the models
never need a shared vocabulary.
"""

from .engine import (
    JOINT,
    CandidateRecord,
    FusionConfig,
    FusionMode,
    FusionResult,
    TraceEvent,
    fuse,
    rerank_continuations,
    write_trace,
)
from .scoring import SegmentScore, average_perplexity, perplexity, select_winner
from .segmenter import Segment, SegmentMode, aligned_segment, shortest_segment

__version__ = "0.1.0"

__all__ = [
    "JOINT",
    "CandidateRecord",
    "FusionConfig",
    "FusionMode",
    "FusionResult",
    "Segment",
    "SegmentMode",
    "SegmentScore",
    "TraceEvent",
    "aligned_segment",
    "average_perplexity",
    "fuse",
    "perplexity",
    "rerank_continuations",
    "select_winner",
    "shortest_segment",
    "write_trace",
    "__version__",
]

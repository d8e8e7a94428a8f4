"""Cross-model candidate scoring.

A candidate segment is measured by every model as (total negative log
likelihood, token count) over that model's own encoding of the text.
Per-model perplexity is exp(mean nll); candidates are ranked by the
arithmetic mean of those perplexities and the lowest mean wins.  A model
that cannot encode a candidate at all disqualifies it for everyone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import DisqualifiedSegment, EmptySegment, NoQualifiedCandidate


def perplexity(nlls: Sequence[float]) -> float:
    """exp of the mean per-token negative log likelihood."""
    if len(nlls) == 0:
        raise EmptySegment("perplexity over zero tokens is undefined")
    return math.exp(math.fsum(nlls) / len(nlls))


def average_perplexity(ppls: Sequence[Optional[float]]) -> float:
    """Arithmetic mean across models; None marks a model that failed."""
    if len(ppls) == 0:
        raise EmptySegment("no model perplexities to average")
    if any(p is None for p in ppls):
        raise DisqualifiedSegment("candidate unscorable for at least one model")
    return math.fsum(ppls) / len(ppls)


@dataclass
class SegmentScore:
    """All measurements for one candidate segment."""

    candidate_index: int
    origin_model: str
    text: str
    per_model_nll_sum: dict[str, Optional[float]] = field(default_factory=dict)
    per_model_token_count: dict[str, int] = field(default_factory=dict)
    per_model_ppl: dict[str, Optional[float]] = field(default_factory=dict)
    avg_ppl: Optional[float] = None

    @property
    def disqualified(self) -> bool:
        return self.avg_ppl is None

    @classmethod
    def from_measurements(
        cls,
        candidate_index: int,
        origin_model: str,
        text: str,
        measurements: Mapping[str, Optional[tuple[float, int]]],
    ) -> "SegmentScore":
        """Build from per-model (nll_sum, token_count); None means the
        model could not measure the text."""
        score = cls(candidate_index, origin_model, text)
        for model_id, m in measurements.items():
            if m is None:
                score.per_model_nll_sum[model_id] = None
                score.per_model_token_count[model_id] = 0
                score.per_model_ppl[model_id] = None
                continue
            nll_sum, count = m
            score.per_model_nll_sum[model_id] = nll_sum
            score.per_model_token_count[model_id] = count
            score.per_model_ppl[model_id] = math.exp(nll_sum / count) if count else None
        ppls = list(score.per_model_ppl.values())
        try:
            score.avg_ppl = average_perplexity(ppls)
        except DisqualifiedSegment:
            score.avg_ppl = None
        return score


def select_winner(scores: Sequence[SegmentScore]) -> SegmentScore:
    """Lowest average perplexity wins; ties go to the earliest candidate."""
    qualified = [s for s in scores if not s.disqualified]
    if not qualified:
        raise NoQualifiedCandidate("every candidate was disqualified")
    return min(qualified, key=lambda s: (s.avg_ppl, s.candidate_index))

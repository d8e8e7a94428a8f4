"""Joint generation across heterogeneous model backends.

The joint loop alternates per-model segment generation with cross-model
selection: every backend proposes a text segment from a fork of its
context, every backend scores every proposal on its own tokens, the
lowest average perplexity wins, and the winning text is appended to all
contexts.  Text is the only thing that crosses model boundaries, so the
backends' vocabularies never need to overlap.

Two more modes reuse the same scoring: RERANK picks the best of the
models' independent full continuations, and COOL_PLUS_R reranks the
joint continuation against the individual ones.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, TextIO

from .backends.base import Backend, Session, SessionTokenSource
from .errors import (
    ConfigError,
    EmptySegment,
    EncodingFailure,
    SegmentCapExceeded,
    WindowMismatch,
)
from .scoring import SegmentScore, select_winner
from .segmenter import Segment, SegmentMode, aligned_segment, shortest_segment
from .tokenizers import CodecWindow

JOINT = "joint"


class FusionMode(Enum):
    COOL = "cool"
    RERANK = "rerank"
    COOL_PLUS_R = "cool+r"


@dataclass(frozen=True)
class FusionConfig:
    mode: FusionMode = FusionMode.COOL
    segment_mode: SegmentMode = SegmentMode.SHORTEST
    max_iterations: int = 16
    max_new_chars: int = 400
    stop_strings: tuple[str, ...] = ()
    segment_token_cap: int = 32
    codec_window_k: int = 4
    parallel: bool = True

    def __post_init__(self):
        for name in ("max_iterations", "max_new_chars", "segment_token_cap",
                     "codec_window_k"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")

    @property
    def window(self) -> CodecWindow:
        return CodecWindow(self.codec_window_k)


@dataclass
class CandidateRecord:
    model_id: str
    segment_text: str
    per_model_ppl: dict[str, Optional[float]]
    avg_ppl: Optional[float]


@dataclass
class TraceEvent:
    iteration: int
    candidates: list[CandidateRecord]
    winner_model: str
    winner_text: str

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "candidates": [
                {
                    "model_id": c.model_id,
                    "segment_text": c.segment_text,
                    "per_model_ppl": c.per_model_ppl,
                    "avg_ppl": c.avg_ppl,
                }
                for c in self.candidates
            ],
            "winner_model": self.winner_model,
            "winner_text": self.winner_text,
        }


@dataclass
class FusionResult:
    joint_text: str
    individual_texts: dict[str, str]
    chosen_text: str
    chosen_source: str
    trace: list[TraceEvent] = field(default_factory=list)


def write_trace(trace: Sequence[TraceEvent], out: TextIO) -> None:
    """One JSON object per line, keys sorted, byte-stable across runs."""
    for event in trace:
        out.write(json.dumps(event.to_dict(), sort_keys=True))
        out.write("\n")


def _map(parallel: bool, fn: Callable, items: Sequence):
    """Order-preserving fan-out; results joined before anything merges."""
    if not parallel or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=len(items)) as pool:
        return list(pool.map(fn, items))


def _validate_backends(backends: Sequence[Backend]) -> None:
    if not backends:
        raise ConfigError("at least one backend is required")
    ids = [b.descriptor.model_id for b in backends]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate model ids: {ids}")
    if JOINT in ids:
        raise ConfigError(f"model id {JOINT!r} is reserved")


def fuse(prompt: str, backends: Sequence[Backend], config: FusionConfig) -> FusionResult:
    _validate_backends(backends)
    if config.mode is FusionMode.COOL:
        joint, trace = _cool_loop(prompt, backends, config)
        return FusionResult(joint, {}, joint, JOINT, trace)
    if config.mode is FusionMode.RERANK:
        return _rerank_mode(prompt, backends, config)
    return _cool_plus_r(prompt, backends, config)


# -- COOL ------------------------------------------------------------------


def _generate_candidate(session: Session, config: FusionConfig,
                        tokenizers) -> Optional[Segment]:
    """One proposal from a fork of the live session; a stream stuck on
    undecodable tokens simply proposes nothing this iteration."""
    fork = session.fork()
    try:
        source = SessionTokenSource(fork)
        if config.segment_mode is SegmentMode.ALIGNED:
            return aligned_segment(source, fork.tokenizer, tokenizers,
                                   config.window, config.segment_token_cap)
        return shortest_segment(source, fork.tokenizer, config.window,
                                config.segment_token_cap)
    except SegmentCapExceeded:
        return None
    finally:
        fork.close()


def _score_candidates(session: Session, texts: Sequence[str]) -> list:
    """One scoring fork per backend per iteration; a text no model can
    measure comes back as None."""
    fork = session.fork()
    try:
        out = []
        for text in texts:
            try:
                out.append(fork.score_text(text))
            except (EncodingFailure, EmptySegment, WindowMismatch):
                out.append(None)
        return out
    finally:
        fork.close()


def _first_stop_hit(text: str, stop_strings: Sequence[str]) -> Optional[int]:
    positions = [p for p in (text.find(s) for s in stop_strings) if p >= 0]
    return min(positions) if positions else None


def _cool_loop(prompt: str, backends: Sequence[Backend],
               config: FusionConfig) -> tuple[str, list[TraceEvent]]:
    sessions = [b.open_session(prompt) for b in backends]
    tokenizers = [b.tokenizer for b in backends]
    model_ids = [b.descriptor.model_id for b in backends]
    active = [True] * len(backends)
    joint = ""
    trace: list[TraceEvent] = []
    try:
        for iteration in range(config.max_iterations):
            live = [i for i in range(len(backends)) if active[i]]
            if not live:
                break
            segments = _map(
                config.parallel,
                lambda i: _generate_candidate(sessions[i], config, tokenizers),
                live,
            )
            candidates: list[tuple[int, Segment]] = []
            for i, seg in zip(live, segments):
                if seg is None:
                    continue
                if seg.eos and not seg.text:
                    active[i] = False  # stream over; keeps scoring
                    continue
                candidates.append((i, seg))
            if not candidates:
                break
            texts = [seg.text for _, seg in candidates]
            per_backend = _map(
                config.parallel,
                lambda j: _score_candidates(sessions[j], texts),
                range(len(backends)),
            )
            scores = []
            for ci, (i, seg) in enumerate(candidates):
                measurements = {
                    model_ids[j]: per_backend[j][ci] for j in range(len(backends))
                }
                scores.append(SegmentScore.from_measurements(
                    ci, model_ids[i], seg.text, measurements))
            winner = select_winner(scores)
            winner_index, winner_seg = candidates[winner.candidate_index]
            trace.append(TraceEvent(
                iteration=iteration,
                candidates=[
                    CandidateRecord(s.origin_model, s.text, dict(s.per_model_ppl),
                                    s.avg_ppl)
                    for s in scores
                ],
                winner_model=model_ids[winner_index],
                winner_text=winner_seg.text,
            ))
            joint += winner_seg.text
            if winner_seg.eos:
                break
            cut = _first_stop_hit(joint, config.stop_strings)
            if cut is not None:
                joint = joint[:cut]
                break
            if len(joint) >= config.max_new_chars:
                break
            _map(config.parallel,
                 lambda s: s.append_text(winner_seg.text), sessions)
    finally:
        for s in sessions:
            s.close()
    return joint, trace


# -- independent continuations and reranking -------------------------------


def _greedy_continuation(backend: Backend, prompt: str,
                         config: FusionConfig) -> str:
    """Plain greedy decode chunked into segments, same stop rules as the
    joint loop."""
    session = backend.open_session(prompt)
    try:
        source = SessionTokenSource(session)
        text = ""
        for _ in range(config.max_iterations):
            try:
                seg = shortest_segment(source, backend.tokenizer, config.window,
                                       config.segment_token_cap)
            except SegmentCapExceeded:
                break  # keep whatever decoded so far
            text += seg.text
            if seg.eos:
                break
            cut = _first_stop_hit(text, config.stop_strings)
            if cut is not None:
                text = text[:cut]
                break
            if len(text) >= config.max_new_chars:
                break
        return text
    finally:
        session.close()


def rerank_continuations(
    continuations: Sequence[tuple[str, str]],
    backends: Sequence[Backend],
    prompt: str,
    parallel: bool = True,
) -> tuple[str, list[SegmentScore]]:
    """Score whole continuations against the shared prompt context with
    every backend; lowest average perplexity wins, earliest entry on
    ties.  Returns (winning source id, all scores)."""
    if not continuations:
        raise ConfigError("at least one continuation is required")
    if any(not text for _, text in continuations):
        raise EmptySegment("reranked continuations must be non-empty")
    _validate_backends(backends)
    model_ids = [b.descriptor.model_id for b in backends]
    texts = [text for _, text in continuations]

    def score_all(backend: Backend):
        session = backend.open_session(prompt)
        try:
            return _score_candidates(session, texts)
        finally:
            session.close()

    per_backend = _map(parallel, score_all, backends)
    scores = []
    for ci, (source_id, text) in enumerate(continuations):
        measurements = {
            model_ids[j]: per_backend[j][ci] for j in range(len(backends))
        }
        scores.append(SegmentScore.from_measurements(ci, source_id, text, measurements))
    winner = select_winner(scores)
    return winner.origin_model, scores


def _rerank_trace_event(iteration: int, scores: Sequence[SegmentScore],
                        winner_id: str) -> TraceEvent:
    winner_text = next(s.text for s in scores if s.origin_model == winner_id)
    return TraceEvent(
        iteration=iteration,
        candidates=[
            CandidateRecord(s.origin_model, s.text, dict(s.per_model_ppl), s.avg_ppl)
            for s in scores
        ],
        winner_model=winner_id,
        winner_text=winner_text,
    )


def _individual_continuations(prompt, backends, config) -> dict[str, str]:
    texts = _map(config.parallel,
                 lambda b: _greedy_continuation(b, prompt, config), backends)
    return {b.descriptor.model_id: t for b, t in zip(backends, texts)}


def _rerank_mode(prompt: str, backends: Sequence[Backend],
                 config: FusionConfig) -> FusionResult:
    individual = _individual_continuations(prompt, backends, config)
    entries = [(mid, text) for mid, text in individual.items() if text]
    if not entries:
        first = backends[0].descriptor.model_id
        return FusionResult("", individual, "", first, [])
    winner_id, scores = rerank_continuations(entries, backends, prompt,
                                             config.parallel)
    return FusionResult(
        joint_text="",
        individual_texts=individual,
        chosen_text=dict(entries)[winner_id],
        chosen_source=winner_id,
        trace=[_rerank_trace_event(0, scores, winner_id)],
    )


def _cool_plus_r(prompt: str, backends: Sequence[Backend],
                 config: FusionConfig) -> FusionResult:
    joint, trace = _cool_loop(prompt, backends, config)
    individual = _individual_continuations(prompt, backends, config)
    # Joint first: on exact ties the fused continuation is kept.
    entries = [(JOINT, joint)] + [(mid, t) for mid, t in individual.items()]
    entries = [(sid, t) for sid, t in entries if t]
    if not entries:
        return FusionResult(joint, individual, joint, JOINT, trace)
    winner_id, scores = rerank_continuations(entries, backends, prompt,
                                             config.parallel)
    trace = trace + [_rerank_trace_event(len(trace), scores, winner_id)]
    return FusionResult(
        joint_text=joint,
        individual_texts=individual,
        chosen_text=dict(entries)[winner_id],
        chosen_source=winner_id,
        trace=trace,
    )

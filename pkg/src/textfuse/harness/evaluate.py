"""Desk-scale task evaluation across fusion modes.

Runs every (task, mode) cell, where a mode is one of the shared fusion
modes or a ``single:<model>`` baseline, and reports exact accuracies
plus optional per-cell trace files.  With mock backends the whole
report is byte-identical across reruns.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from ..backends import Backend
from ..engine import FusionConfig, FusionMode, FusionResult, fuse, write_trace
from ..errors import ConfigError
from .config import ModeSelector, RunConfig, build_backends, parse_mode
from .tasks import TaskSpec, extract_answer


@dataclass
class ItemResult:
    task: str
    mode: str
    item_input: str
    gold: str
    generation: str
    answer: Optional[str]
    correct: bool

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ModeRow:
    task: str
    mode: str
    correct: int
    total: int
    accuracy: float
    trace_file: Optional[str] = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunReport:
    rows: list[ModeRow] = field(default_factory=list)
    items: list[ItemResult] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "items": [i.to_dict() for i in self.items],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def default_modes(config: RunConfig) -> list[str]:
    """Per-model baselines first, then the shared modes."""
    singles = [f"single:{spec.backend_id}" for spec in config.backends]
    return singles + [m.value for m in FusionMode]


def select_mode(selector: ModeSelector, fusion: FusionConfig,
                backends: Sequence[Backend]) -> tuple[FusionConfig, list[Backend]]:
    """Resolve a mode selector into an engine config and backend subset."""
    if isinstance(selector, FusionMode):
        return dataclasses.replace(fusion, mode=selector), list(backends)
    _, model_id = selector
    chosen = [b for b in backends if b.descriptor.model_id == model_id]
    if not chosen:
        known = [b.descriptor.model_id for b in backends]
        raise ConfigError(f"single: unknown model {model_id!r}; backends are {known}")
    return dataclasses.replace(fusion, mode=FusionMode.COOL), chosen


def run_cell(task: TaskSpec, mode_str: str, fusion: FusionConfig,
             backends: Sequence[Backend], parallel_items: bool = False,
             ) -> tuple[ModeRow, list[ItemResult], list[FusionResult]]:
    cell_config, chosen = select_mode(parse_mode(mode_str), fusion, backends)

    def run_item(pair):
        item_input, gold = pair
        prompt = task.render_prompt(item_input)
        result = fuse(prompt, chosen, cell_config)
        answer = extract_answer(result.chosen_text, task)
        return ItemResult(
            task=task.name,
            mode=mode_str,
            item_input=item_input,
            gold=gold,
            generation=result.chosen_text,
            answer=answer,
            correct=answer == gold,
        ), result

    if parallel_items and len(task.eval_items) > 1:
        with ThreadPoolExecutor(max_workers=min(8, len(task.eval_items))) as pool:
            outcomes = list(pool.map(run_item, task.eval_items))
    else:
        outcomes = [run_item(pair) for pair in task.eval_items]

    items = [item for item, _ in outcomes]
    results = [result for _, result in outcomes]
    correct = sum(item.correct for item in items)
    row = ModeRow(
        task=task.name,
        mode=mode_str,
        correct=correct,
        total=len(items),
        accuracy=correct / len(items),
    )
    return row, items, results


def run(config: RunConfig, modes: Optional[Sequence[str]] = None,
        seed: Optional[int] = None, trace_dir: Optional[Path] = None,
        parallel_items: bool = False) -> RunReport:
    if not config.tasks:
        raise ConfigError("no tasks configured")
    backends = build_backends(config, seed)
    report = RunReport()
    try:
        for task in config.tasks:
            for mode_str in (modes or default_modes(config)):
                row, items, results = run_cell(
                    task, mode_str, config.fusion, backends, parallel_items)
                if trace_dir is not None:
                    name = f"{task.name}.{mode_str.replace(':', '-')}.trace.jsonl"
                    trace_dir.mkdir(parents=True, exist_ok=True)
                    with open(trace_dir / name, "w", encoding="utf-8") as fh:
                        for result in results:
                            write_trace(result.trace, fh)
                    row.trace_file = name
                report.rows.append(row)
                report.items.extend(items)
    finally:
        for backend in backends:
            backend.close()
    return report

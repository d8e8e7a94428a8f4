"""Few-shot task definitions and answer extraction."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigError


@dataclass
class TaskSpec:
    """A prompt-completion task with in-context examples.

    The first ``n_shot`` examples render through ``shot_template`` into
    the prompt's {shots} slot; the rest are what gets evaluated.
    """

    name: str
    prompt_template: str
    shot_template: str
    answer_pattern: str
    n_shot: int = 0
    examples: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.n_shot < 0:
            raise ConfigError(f"task {self.name}: n_shot must be >= 0")
        if self.n_shot >= len(self.examples):
            raise ConfigError(
                f"task {self.name}: n_shot={self.n_shot} leaves no examples to evaluate")
        try:
            re.compile(self.answer_pattern)
        except re.error as exc:
            raise ConfigError(
                f"task {self.name}: bad answer_pattern {self.answer_pattern!r}: {exc}"
            ) from None

    @property
    def shots(self) -> list[tuple[str, str]]:
        return self.examples[:self.n_shot]

    @property
    def eval_items(self) -> list[tuple[str, str]]:
        return self.examples[self.n_shot:]

    def render_prompt(self, item_input: str) -> str:
        shots = " ".join(
            self.shot_template.format(input=inp, answer=ans)
            for inp, ans in self.shots
        )
        return self.prompt_template.format(shots=shots, input=item_input)


def extract_answer(generation: str, task: TaskSpec) -> Optional[str]:
    """Last match of the task's pattern in the generation, or None."""
    matches = re.findall(task.answer_pattern, generation)
    if not matches:
        return None
    last = matches[-1]
    # A tuple means the pattern had multiple groups; join what matched.
    if isinstance(last, tuple):
        last = "".join(part for part in last if part)
    return last

"""TOML run configuration.

One file describes a whole reproducible run: the fusion settings, the
backends (mock or remote), and optional evaluation tasks::

    [fusion]
    mode = "cool"              # cool | rerank | cool+r | single:<model-id>
    segment = "shortest"       # shortest | aligned
    stop_strings = [" ."]

    [[backends]]
    id = "left"
    kind = "ngram"             # ngram | remote
    tokenizer = "pkg:vocab_word.json"
    corpus = "pkg:corpus_left.txt"
    order = 3

    [[tasks]]
    name = "facts"
    prompt_template = "{shots} the {input} is"
    shot_template = "the {input} is {answer} ."
    answer_pattern = "([a-z]+)"
    n_shot = 2
    examples = [["grass", "green"], ["moon", "pale"]]
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..backends import Backend, NGramBackend, RemoteBackend
from ..engine import FusionConfig, FusionMode
from ..errors import ConfigError
from ..segmenter import SegmentMode
from ..tokenizers import CodecWindow, load_tokenizer
from .tasks import TaskSpec

# Either a shared fusion mode or a single-backend baseline.
ModeSelector = Union[FusionMode, tuple[str, str]]


@dataclass
class BackendSpec:
    backend_id: str
    kind: str
    tokenizer: str
    corpus: Optional[str] = None
    order: int = 2
    smoothing_k: float = 0.1
    seed: Optional[int] = None
    corpus_lines: Optional[int] = None
    url: Optional[str] = None


@dataclass
class RunConfig:
    fusion: FusionConfig
    mode: ModeSelector
    backends: list[BackendSpec] = field(default_factory=list)
    tasks: list[TaskSpec] = field(default_factory=list)
    base_dir: Path = field(default_factory=Path)


def parse_mode(raw: str) -> ModeSelector:
    if raw.startswith("single:"):
        model_id = raw[len("single:"):]
        if not model_id:
            raise ConfigError("single: mode needs a model id, e.g. single:left")
        return ("single", model_id)
    try:
        return FusionMode(raw)
    except ValueError:
        choices = [m.value for m in FusionMode] + ["single:<model-id>"]
        raise ConfigError(f"unknown mode {raw!r}; choose from {choices}") from None


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing required field {key!r} in {where}")
    return table[key]


def load_config(path: Union[str, Path]) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid TOML: {exc}") from None

    fusion_tbl = doc.get("fusion", {})
    mode = parse_mode(fusion_tbl.get("mode", "cool"))
    try:
        segment_mode = SegmentMode(fusion_tbl.get("segment", "shortest"))
    except ValueError:
        raise ConfigError(
            f"unknown segment mode {fusion_tbl.get('segment')!r}; "
            f"choose shortest or aligned") from None
    fusion = FusionConfig(
        mode=mode if isinstance(mode, FusionMode) else FusionMode.COOL,
        segment_mode=segment_mode,
        max_iterations=fusion_tbl.get("max_iterations", 16),
        max_new_chars=fusion_tbl.get("max_new_chars", 400),
        stop_strings=tuple(fusion_tbl.get("stop_strings", [])),
        segment_token_cap=fusion_tbl.get("segment_token_cap", 32),
        codec_window_k=fusion_tbl.get("codec_window_k", 4),
        parallel=fusion_tbl.get("parallel", True),
    )

    backends = []
    for i, tbl in enumerate(doc.get("backends", [])):
        where = f"backends[{i}]"
        kind = _require(tbl, "kind", where)
        if kind not in ("ngram", "remote"):
            raise ConfigError(f"{where}: unknown backend kind {kind!r}")
        spec = BackendSpec(
            backend_id=_require(tbl, "id", where),
            kind=kind,
            tokenizer=_require(tbl, "tokenizer", where),
            corpus=tbl.get("corpus"),
            order=tbl.get("order", 2),
            smoothing_k=tbl.get("smoothing_k", 0.1),
            seed=tbl.get("seed"),
            corpus_lines=tbl.get("corpus_lines"),
            url=tbl.get("url"),
        )
        if kind == "ngram" and spec.corpus is None:
            raise ConfigError(f"{where}: ngram backends need a corpus")
        if kind == "remote" and spec.url is None:
            raise ConfigError(f"{where}: remote backends need a url")
        backends.append(spec)

    tasks = []
    for i, tbl in enumerate(doc.get("tasks", [])):
        where = f"tasks[{i}]"
        examples = [tuple(pair) for pair in _require(tbl, "examples", where)]
        if any(len(pair) != 2 for pair in examples):
            raise ConfigError(f"{where}: examples must be [input, answer] pairs")
        tasks.append(TaskSpec(
            name=_require(tbl, "name", where),
            prompt_template=_require(tbl, "prompt_template", where),
            shot_template=tbl.get("shot_template", "{input} {answer}"),
            answer_pattern=_require(tbl, "answer_pattern", where),
            n_shot=tbl.get("n_shot", 0),
            examples=examples,
        ))

    return RunConfig(fusion=fusion, mode=mode, backends=backends, tasks=tasks,
                     base_dir=p.parent)


def load_corpus(ref: str, base_dir: Path) -> list[str]:
    """Corpus lines from a pkg: resource or a file path (relative paths
    resolve against the config file's directory)."""
    if ref.startswith("pkg:"):
        text = resources.files("textfuse.data").joinpath(ref[4:]).read_text("utf-8")
    else:
        p = Path(ref)
        if not p.is_absolute():
            p = base_dir / p
        if not p.exists():
            raise ConfigError(f"corpus file not found: {p}")
        text = p.read_text("utf-8")
    return [line for line in text.splitlines() if line.strip()]


def build_backend(spec: BackendSpec, config: FusionConfig, base_dir: Path,
                  seed: Optional[int] = None) -> Backend:
    window = CodecWindow(config.codec_window_k)
    tokenizer = load_tokenizer(_resolve_tokenizer(spec.tokenizer, base_dir))
    if spec.kind == "ngram":
        return NGramBackend(
            model_id=spec.backend_id,
            tokenizer=tokenizer,
            corpus=load_corpus(spec.corpus, base_dir),
            order=spec.order,
            smoothing_k=spec.smoothing_k,
            window=window,
            seed=seed if seed is not None else spec.seed,
            corpus_lines=spec.corpus_lines,
        )
    return RemoteBackend(
        base_url=spec.url,
        tokenizer=tokenizer,
        window=window,
        model_id=spec.backend_id,
    )


def _resolve_tokenizer(ref: str, base_dir: Path) -> str:
    if ref.startswith("pkg:"):
        return ref
    p = Path(ref)
    if not p.is_absolute():
        p = base_dir / p
    return str(p)


def build_backends(config: RunConfig, seed: Optional[int] = None) -> list[Backend]:
    if not config.backends:
        raise ConfigError("no backends configured")
    return [build_backend(s, config.fusion, config.base_dir, seed)
            for s in config.backends]

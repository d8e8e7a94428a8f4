"""Command line interface.

Verbs:

* ``fuse``                one prompt through the configured backends
* ``eval``                run every configured task across modes
* ``protocol-serve-mock`` host one configured mock backend over HTTP
* ``diag vocab-overlap``  token-string overlap between the backends

Exit codes: 0 success, 2 configuration error, 3 backend failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

from ..backends import BackendHTTPServer
from ..engine import fuse, write_trace
from ..errors import BackendUnavailable, ConfigError, TextFuseError
from ..segmenter import SegmentMode
from ..tokenizers import vocab_overlap
from .config import RunConfig, build_backend, build_backends, load_config, parse_mode
from .evaluate import default_modes, run, select_mode


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--mode", default=None,
                        help="cool | rerank | cool+r | single:<model-id>")
    parser.add_argument("--segment", default=None, choices=["shortest", "aligned"])
    parser.add_argument("--seed", type=int, default=None,
                        help="shuffle seed for n-gram training corpora")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="textfuse")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_fuse = sub.add_parser("fuse", help="fuse one prompt")
    _add_common(p_fuse)
    p_fuse.add_argument("--prompt", required=True)
    p_fuse.add_argument("--trace-out", default=None, help="trace JSON-lines path")

    p_eval = sub.add_parser("eval", help="evaluate configured tasks")
    _add_common(p_eval)
    p_eval.add_argument("--trace-out", default=None,
                        help="directory for per-cell trace files")
    p_eval.add_argument("--report-out", default=None, help="report JSON path")
    p_eval.add_argument("--parallel-items", action="store_true",
                        help="run task items concurrently")

    p_serve = sub.add_parser("protocol-serve-mock",
                             help="host one configured backend over HTTP")
    p_serve.add_argument("--config", required=True)
    p_serve.add_argument("--backend", required=True, help="backend id to serve")
    p_serve.add_argument("--seed", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=0)

    p_diag = sub.add_parser("diag", help="diagnostics")
    diag_sub = p_diag.add_subparsers(dest="diag_verb", required=True)
    p_overlap = diag_sub.add_parser("vocab-overlap",
                                    help="pairwise token-string overlap")
    p_overlap.add_argument("--config", required=True)
    p_overlap.add_argument("--seed", type=int, default=None)

    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    fusion = config.fusion
    mode = config.mode
    if args.mode is not None:
        mode = parse_mode(args.mode)
    if getattr(args, "segment", None) is not None:
        fusion = dataclasses.replace(fusion, segment_mode=SegmentMode(args.segment))
    return dataclasses.replace(config, fusion=fusion, mode=mode)


def _cmd_fuse(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    backends = build_backends(config, args.seed)
    try:
        cell_config, chosen = select_mode(config.mode, config.fusion, backends)
        result = fuse(args.prompt, chosen, cell_config)
    finally:
        for backend in backends:
            backend.close()
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            write_trace(result.trace, fh)
    print(json.dumps({
        "joint_text": result.joint_text,
        "individual_texts": result.individual_texts,
        "chosen_text": result.chosen_text,
        "chosen_source": result.chosen_source,
        "iterations": len(result.trace),
    }, sort_keys=True, indent=1))
    return 0


def _cmd_eval(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    modes = [args.mode] if args.mode else default_modes(config)
    trace_dir = Path(args.trace_out) if args.trace_out else None
    report = run(config, modes=modes, seed=args.seed, trace_dir=trace_dir,
                 parallel_items=args.parallel_items)
    payload = report.to_json()
    if args.report_out:
        Path(args.report_out).write_text(payload, "utf-8")
    sys.stdout.write(payload)
    return 0


def _cmd_serve(args) -> int:
    config = load_config(args.config)
    spec = next((s for s in config.backends if s.backend_id == args.backend), None)
    if spec is None:
        known = [s.backend_id for s in config.backends]
        raise ConfigError(f"unknown backend {args.backend!r}; config has {known}")
    if spec.kind != "ngram":
        raise ConfigError(f"backend {args.backend!r} is {spec.kind}, not a mock")
    backend = build_backend(spec, config.fusion, config.base_dir, args.seed)
    server = BackendHTTPServer(backend, host=args.host, port=args.port)
    server.start()
    print(f"serving {args.backend} at {server.url}", flush=True)
    try:
        while True:
            server._thread.join(1)
    except KeyboardInterrupt:
        return 0
    finally:
        server.stop()


def _cmd_diag_overlap(args) -> int:
    config = load_config(args.config)
    backends = build_backends(config, args.seed)
    try:
        matrix = {}
        for a in backends:
            row = {}
            for b in backends:
                if a is not b:
                    row[b.descriptor.model_id] = vocab_overlap(a.tokenizer, b.tokenizer)
            matrix[a.descriptor.model_id] = row
    finally:
        for backend in backends:
            backend.close()
    print(json.dumps(matrix, sort_keys=True, indent=1))
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "fuse":
            return _cmd_fuse(args)
        if args.verb == "eval":
            return _cmd_eval(args)
        if args.verb == "protocol-serve-mock":
            return _cmd_serve(args)
        return _cmd_diag_overlap(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BackendUnavailable as exc:
        print(f"backend failure: {exc}", file=sys.stderr)
        return 3
    except TextFuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: serve a saved model over the wire protocol."""

from __future__ import annotations

import argparse
import os
import sys

from .model import ServedModel
from .server import AdapterHTTPServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hf-adapter",
        description="serve a transformers causal LM over the session protocol")
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="start an HTTP server for one model")
    serve.add_argument("--model", default=os.environ.get("HF_ADAPTER_CACHE"),
                       help="model directory (default: $HF_ADAPTER_CACHE)")
    serve.add_argument("--model-id", default=None,
                       help="advertised model id (default: directory name)")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0)
    serve.add_argument("--verbose", action="store_true",
                       help="log each request to stderr")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.model is None:
        print("hf-adapter: no model directory; pass --model or set "
              "HF_ADAPTER_CACHE", file=sys.stderr)
        return 2
    try:
        served = ServedModel(args.model, model_id=args.model_id)
    except (OSError, ValueError) as exc:
        print(f"hf-adapter: cannot load model: {exc}", file=sys.stderr)
        return 2
    server = AdapterHTTPServer(served, host=args.host, port=args.port,
                               verbose=args.verbose)
    with server:
        print(f"serving {served.model_id} at {server.url}", flush=True)
        try:
            server._thread.join()
        except KeyboardInterrupt:
            pass
    return 0


if __name__ == "__main__":
    sys.exit(main())

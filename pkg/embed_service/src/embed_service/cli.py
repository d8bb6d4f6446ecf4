"""Command-line launcher for the embedding service."""

from __future__ import annotations

import argparse

from .app import serve
from .backend import MAX_BATCH, TRUNCATION, ServiceConfig


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="embed-service",
        description="Serve pretrained-transformer first-token embeddings over HTTP.",
    )
    parser.add_argument("--model", required=True,
                        help="model name or local path loadable by transformers")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8300)
    parser.add_argument("--max-batch", type=int, default=MAX_BATCH)
    parser.add_argument("--truncation", type=int, default=TRUNCATION,
                        help="token limit per text")
    args = parser.parse_args(argv)
    serve(ServiceConfig(
        model_name=args.model,
        max_batch=args.max_batch,
        truncation=args.truncation,
        host=args.host,
        port=args.port,
    ))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

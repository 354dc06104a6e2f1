"""Command-line corpus ingestion and server startup.

The corpus file is line-delimited JSON, one record per line with "title",
"url", and "text" fields (blank lines are skipped). Records are loaded
through the same add pipeline the HTTP endpoint uses, in process.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import CorpusFormatError, EmptyTextError
from .service import DEFAULT_DIMENSION, DEFAULT_SEED, Engine, create_app

ENV_DATA_DIR = "CORPUSMAP_DATA_DIR"
ENV_SEED = "CORPUSMAP_SEED"
ENV_ADDR = "CORPUSMAP_ADDR"


def ingest_file(engine: Engine, path: str) -> int:
    """Load every record in the corpus file; returns the document count."""
    count = 0
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(line_number, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict) or "text" not in record:
                raise CorpusFormatError(line_number, "record must be an object with a text field")
            try:
                engine.add_document(
                    str(record.get("title", "")),
                    str(record.get("url", "")),
                    str(record["text"]),
                )
            except EmptyTextError as exc:
                raise CorpusFormatError(line_number, str(exc)) from exc
            count += 1
    return count


def _parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corpusmap")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--data-dir",
        default=os.environ.get(ENV_DATA_DIR),
        help="persistence directory (default: in-memory only)",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=int(os.environ.get(ENV_SEED, DEFAULT_SEED)),
        help="engine seed for embeddings and layout",
    )
    common.add_argument("--dimension", type=int, default=DEFAULT_DIMENSION)
    common.add_argument("--cors-origin", action="append", default=[], help="allowed UI origin")

    sub = parser.add_subparsers(dest="command", required=True)
    ingest = sub.add_parser("ingest", parents=[common], help="load a corpus file")
    ingest.add_argument("path", help="line-delimited JSON corpus file")
    ingest.add_argument("--kind", choices=["document"], default="document")
    ingest.add_argument("--serve", metavar="ADDR", help="start the HTTP server afterwards")

    serve = sub.add_parser("serve", parents=[common], help="start the HTTP server")
    serve.add_argument(
        "--addr", default=os.environ.get(ENV_ADDR, "127.0.0.1:8000"), metavar="ADDR"
    )
    return parser


def _serve(engine: Engine, addr: str, cors_origins) -> None:
    import uvicorn

    app = create_app(engine, cors_origins=tuple(cors_origins))
    host, port = _parse_addr(addr)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    engine = Engine(data_dir=args.data_dir, seed=args.seed, dimension=args.dimension)
    try:
        if args.command == "ingest":
            try:
                count = ingest_file(engine, args.path)
            except CorpusFormatError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return 1
            print(f"{count} documents")
            if args.serve:
                _serve(engine, args.serve, args.cors_origin)
        elif args.command == "serve":
            _serve(engine, args.addr, args.cors_origin)
    finally:
        engine.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())

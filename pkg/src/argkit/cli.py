"""Command-line front door: serve the API, evaluate trees, run claims.

stdout carries only machine-readable canonical JSON; diagnostics go to
stderr.  Exit codes: 0 success, 2 validation, 3 backend, 4 config.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from . import builder, documents, gateway, qbaf, semantics
from .builder import BuildError, GenerationConfig, InvalidConfigError
from .gateway import BackendConfig, GatewayError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_CONFIG = 4


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n")


def _fail(message: str, code: int) -> int:
    sys.stderr.write(message.rstrip() + "\n")
    return code


def cmd_serve(args) -> int:
    store_dir = Path(args.store_dir)
    if store_dir.exists() and not store_dir.is_dir():
        return _fail(f"store dir {store_dir} exists and is not a directory", EXIT_CONFIG)
    try:
        store_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        return _fail(f"cannot create store dir {store_dir}: {exc}", EXIT_CONFIG)

    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((args.host, args.port))
    except OSError as exc:
        sock.close()
        return _fail(f"cannot bind {args.host}:{args.port}: {exc}", EXIT_CONFIG)
    host, port = sock.getsockname()[:2]
    _emit({"address": f"http://{host}:{port}"})
    sys.stdout.flush()

    import uvicorn

    from .service import create_app

    app = create_app(str(store_dir), cors_origin=args.cors_origin, ui_dir=args.ui_dir)
    config = uvicorn.Config(app, log_level="warning")
    uvicorn.Server(config).run(sockets=[sock])
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        data = Path(args.qbaf).read_bytes()
    except OSError as exc:
        return _fail(f"cannot read {args.qbaf}: {exc}", EXIT_VALIDATION)
    try:
        tree = qbaf.from_json(data)
    except qbaf.InvariantError as exc:
        for violation in exc.report.violations:
            sys.stderr.write(f"{violation.code}: {violation.message}\n")
        return EXIT_VALIDATION
    except qbaf.QbafError as exc:
        return _fail(f"{exc.code}: {exc}", EXIT_VALIDATION)

    if args.all:
        _emit({sid: semantics.to_json_obj(sid, semantics.evaluate(tree, sid)) for sid in semantics.SEMANTICS_IDS})
    else:
        _emit(semantics.to_json_obj(args.semantics, semantics.evaluate(tree, args.semantics)))
    return EXIT_OK


def _ask_backend(args) -> BackendConfig:
    if args.mock:
        return BackendConfig(kind="mock", mock_seed=args.seed)
    api_key = args.api_key or os.environ.get(gateway.ENV_API_KEY, "")
    if not (args.endpoint and args.model and api_key):
        raise InvalidConfigError("real backend needs --endpoint, --model and an API key (--api-key or LLM_API_KEY)")
    return BackendConfig(
        kind="http", endpoint_url=args.endpoint, model=args.model, api_key=api_key, temperature=args.temperature
    )


def cmd_ask(args) -> int:
    try:
        backend = _ask_backend(args)
        config = GenerationConfig(
            backend=backend,
            semantics=args.semantics,
            depth=args.depth,
            breadth=args.breadth,
        )
        docs = []
        for pdf_path in args.pdf:
            try:
                raw = Path(pdf_path).read_bytes()
            except OSError as exc:
                raise InvalidConfigError(f"cannot read {pdf_path}: {exc}")
            docs.append(documents.pdf_to_markdown(raw, filename=Path(pdf_path).name))
        config = GenerationConfig(
            backend=backend,
            semantics=args.semantics,
            depth=args.depth,
            breadth=args.breadth,
            document_ids=tuple(d.id for d in docs),
        )
    except (InvalidConfigError, gateway.BackendConfigError, documents.PdfError) as exc:
        return _fail(f"{exc.code if hasattr(exc, 'code') else 'config'}: {exc}", EXIT_CONFIG)

    try:
        result = builder.build_qbaf(args.claim, config, docs)
    except BuildError as exc:
        sys.stderr.write(json.dumps(exc.report()) + "\n")
        return EXIT_BACKEND
    except GatewayError as exc:
        return _fail(f"{exc.code}: {exc}", EXIT_BACKEND)

    strengths = semantics.evaluate(result.qbaf, config.semantics)
    root_sigma = strengths[result.qbaf.root]
    context = builder.resolve_context(config, docs)
    _emit(
        {
            "claim": args.claim,
            "settings": {
                "semantics": config.semantics,
                "depth": config.depth,
                "breadth": config.breadth,
                "backend": backend.describe(),
            },
            "qbaf": qbaf.to_json_obj(result.qbaf),
            "strengths": {k: strengths[k] for k in sorted(strengths)},
            "verdict": {
                "root_strength": root_sigma,
                "label": "accept" if root_sigma > 0.5 else "reject" if root_sigma < 0.5 else "undecided",
            },
            "score_flags": {k: result.score_flags[k] for k in sorted(result.score_flags)},
            "documents": [{"id": d.id, "filename": d.filename, "page_count": d.page_count} for d in docs],
            "context_chars": len(context) if context else 0,
        }
    )
    return EXIT_OK


def _int_in(name: str, value: int, allowed: tuple[int, ...]):
    if value not in allowed:
        raise InvalidConfigError(f"{name} must be one of {list(allowed)}, got {value}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="argkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--store-dir", default="./argkit-sessions")
    serve.add_argument("--cors-origin", default=None)
    serve.add_argument("--ui-dir", default=None)
    serve.set_defaults(func=cmd_serve)

    ev = sub.add_parser("eval", help="evaluate a tree file under a semantics")
    ev.add_argument("qbaf", help="path to a QBAF JSON file")
    ev.add_argument("--semantics", default=semantics.DF_QUAD, choices=semantics.SEMANTICS_IDS)
    ev.add_argument("--all", action="store_true", help="print all three semantics side by side")
    ev.set_defaults(func=cmd_eval)

    ask = sub.add_parser("ask", help="build and evaluate a tree for a claim")
    ask.add_argument("claim")
    ask.add_argument("--depth", type=int, default=2)
    ask.add_argument("--breadth", type=int, default=1)
    ask.add_argument("--semantics", default=semantics.DF_QUAD)
    ask.add_argument("--mock", action="store_true", help="use the deterministic mock backend")
    ask.add_argument("--seed", type=int, default=0, help="mock seed")
    ask.add_argument("--endpoint", default="", help="OpenAI-compatible base URL")
    ask.add_argument("--model", default="")
    ask.add_argument("--api-key", default="")
    ask.add_argument("--temperature", type=float, default=0.0)
    ask.add_argument("--pdf", action="append", default=[], help="ground generation in this PDF (repeatable)")
    ask.set_defaults(func=cmd_ask)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "ask":
        try:
            _int_in("--depth", args.depth, builder.DEPTH_CHOICES)
            _int_in("--breadth", args.breadth, builder.BREADTH_CHOICES)
            if args.semantics not in semantics.SEMANTICS_IDS:
                raise InvalidConfigError(f"--semantics must be one of {list(semantics.SEMANTICS_IDS)}")
        except InvalidConfigError as exc:
            return _fail(f"invalid-config: {exc}", EXIT_CONFIG)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

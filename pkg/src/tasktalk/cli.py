"""Command line entry point: REPL, HTTP server, and log analytics."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .analytics import analyze_logs, format_report
from .config import EngineConfig, load_config
from .engine import Engine
from .retrieval import load_recipe_corpus, load_task_corpus
from .state import encode_state


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tasktalk",
        description="Task-guiding dialogue assistant for home projects and cooking.",
    )
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--corpus-dir", help="directory holding tasks.jsonl and recipes.jsonl")
    parser.add_argument("--serve", action="store_true", help="run the HTTP service")
    parser.add_argument("--repl", action="store_true", help="run an interactive console session")
    parser.add_argument("--analyze", metavar="LOG", help="summarize a JSONL turn log and exit")
    parser.add_argument("--ratings", metavar="CSV", help="ratings CSV to join during --analyze")
    parser.add_argument("--port", type=int, default=8080, help="port for --serve")
    parser.add_argument("--session-id", default="repl", help="session id for --repl")
    return parser


def _build_config(args: argparse.Namespace) -> EngineConfig:
    config = load_config(args.config) if args.config else EngineConfig()
    if args.corpus_dir:
        root = Path(args.corpus_dir)
        config = EngineConfig(
            **{
                **config.__dict__,
                "task_corpus_path": str(root / "tasks.jsonl"),
                "recipe_corpus_path": str(root / "recipes.jsonl"),
            }
        )
    return config


def run_repl(engine: Engine, session_id: str, stdin=None, stdout=None) -> int:
    """Line-oriented loop. /quit exits, /state dumps the session state,
    /log prints the last turn's log record."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    last_record: Optional[dict] = None
    print("tasktalk ready. Type /quit to exit.", file=stdout)
    for line in stdin:
        text = line.rstrip("\n")
        if not text.strip():
            continue
        if text.strip() == "/quit":
            break
        if text.strip() == "/state":
            state = engine.get_state(session_id)
            print(encode_state(state) if state else "{}", file=stdout)
            continue
        if text.strip() == "/log":
            print(json.dumps(last_record, sort_keys=True) if last_record else "{}", file=stdout)
            continue
        result = engine.handle_turn(session_id, text)
        last_record = result.log_record
        print(f"[{result.responder_id}] {result.reply}", file=stdout)
        if result.ended:
            break
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.analyze:
        report = analyze_logs(args.analyze, ratings_path=args.ratings)
        print(format_report(report))
        return 0

    config = _build_config(args)
    engine = Engine(
        config=config,
        task_docs=load_task_corpus(config.task_corpus_path),
        recipe_docs=load_recipe_corpus(config.recipe_corpus_path),
    )

    if args.serve:
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(engine), host="127.0.0.1", port=args.port, log_level="warning")
        return 0

    # default to the REPL so `tasktalk` alone is usable
    return run_repl(engine, args.session_id)


if __name__ == "__main__":
    raise SystemExit(main())

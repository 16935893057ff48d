#!/usr/bin/env python3
"""Generate a synthetic turn log and ratings CSV for exercising the analytics report.

Drives the real engine over a handful of scripted conversations so the JSONL
records match what a live deployment would produce, then fabricates ratings.

Usage:
    python3 scripts/make_synthetic_logs.py --out-dir /tmp/logs --conversations 50 --seed 7
"""
from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from tasktalk.analytics import analyze_logs, format_report
from tasktalk.engine import Engine
from tasktalk.state import InMemoryStateStore

SCRIPTS = [
    ["hello", "my roof is broken", "the first one", "next", "stop"],
    ["I want to make lemon pie", "lemon pie", "show ingredients", "stop"],
    ["could you recommend a DIY project?", "the first one", "next"],
    ["hi", "how are you", "I want to bake bread", "1", "next"],
    ["should I invest in stocks", "my sink is clogged", "1", "stop"],
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", type=Path, default=Path("synthetic-logs"))
    parser.add_argument("--conversations", type=int, default=50)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    log_path = args.out_dir / "turns.jsonl"
    ratings_path = args.out_dir / "ratings.csv"
    rng = random.Random(args.seed)

    records = []
    engine = Engine(store=InMemoryStateStore(), log_sink=records.append)
    ratings = {}
    for c in range(args.conversations):
        session_id = f"synthetic-{c}"
        for line in rng.choice(SCRIPTS):
            engine.handle_turn(session_id, line)
        if rng.random() < 0.7:
            ratings[session_id] = float(rng.randint(1, 5))

    with open(log_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    with open(ratings_path, "w", encoding="utf-8") as fh:
        fh.write("session_id,rating\n")
        for session_id, rating in ratings.items():
            fh.write(f"{session_id},{rating}\n")

    print(f"wrote {len(records)} turns to {log_path}")
    print(f"wrote {len(ratings)} ratings to {ratings_path}")
    print()
    print(format_report(analyze_logs(log_path, ratings_path=ratings_path)))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Offline log analytics.

Reads the per-turn JSONL log, groups turns into conversations, and reports
how conversations open (first intent) and close (last responder), optionally
joined against a ratings CSV to attach mean ratings with a normal-approximation
95% interval."""
from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

Z_95 = 1.96
_REQUIRED_FIELDS = ("session_id", "turn_index", "phase", "initiative", "intent", "responder_id")


class AnalyticsError(Exception):
    pass


@dataclass(frozen=True)
class RatedStat:
    count: int
    mean: Optional[float] = None
    ci95: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class LogReport:
    conversation_count: int
    turn_count: int
    skipped_records: int
    initial_intent_counts: dict[str, int]
    final_responder_counts: dict[str, int]
    rated_count: int = 0
    unrated_count: int = 0
    rating_by_initial_intent: dict[str, RatedStat] = field(default_factory=dict)
    rating_by_final_responder: dict[str, RatedStat] = field(default_factory=dict)


def _load_records(log_path: str | Path) -> tuple[list[dict], int]:
    records, skipped = [], 0
    with open(log_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                skipped += 1
                continue
            if not isinstance(rec, dict) or any(k not in rec for k in _REQUIRED_FIELDS):
                skipped += 1
                continue
            records.append(rec)
    return records, skipped


def load_ratings(path: str | Path) -> dict[str, float]:
    """CSV with header session_id,rating; bad rows are ignored."""
    ratings: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            sid = (row.get("session_id") or "").strip()
            raw = (row.get("rating") or "").strip()
            if not sid or not raw:
                continue
            try:
                ratings[sid] = float(raw)
            except ValueError:
                continue
    return ratings


def _mean_ci(values: list[float]) -> RatedStat:
    n = len(values)
    if n == 0:
        return RatedStat(count=0)
    mean = sum(values) / n
    if n < 2:
        return RatedStat(count=n, mean=mean)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half = Z_95 * math.sqrt(var / n)
    return RatedStat(count=n, mean=mean, ci95=(mean - half, mean + half))


def analyze_logs(log_path: str | Path, ratings_path: Optional[str | Path] = None) -> LogReport:
    records, skipped = _load_records(log_path)
    by_session: dict[str, list[dict]] = defaultdict(list)
    for rec in records:
        by_session[rec["session_id"]].append(rec)
    for turns in by_session.values():
        turns.sort(key=lambda r: r["turn_index"])

    initial_intents: dict[str, int] = defaultdict(int)
    final_responders: dict[str, int] = defaultdict(int)
    opening: dict[str, str] = {}
    closing: dict[str, str] = {}
    for sid, turns in by_session.items():
        opening[sid] = turns[0]["intent"]
        closing[sid] = turns[-1]["responder_id"]
        initial_intents[opening[sid]] += 1
        final_responders[closing[sid]] += 1

    report = LogReport(
        conversation_count=len(by_session),
        turn_count=len(records),
        skipped_records=skipped,
        initial_intent_counts=dict(initial_intents),
        final_responder_counts=dict(final_responders),
    )
    if ratings_path is None:
        return report

    ratings = load_ratings(ratings_path)
    rated = [sid for sid in by_session if sid in ratings]
    by_intent: dict[str, list[float]] = defaultdict(list)
    by_responder: dict[str, list[float]] = defaultdict(list)
    for sid in rated:
        by_intent[opening[sid]].append(ratings[sid])
        by_responder[closing[sid]].append(ratings[sid])
    return LogReport(
        conversation_count=report.conversation_count,
        turn_count=report.turn_count,
        skipped_records=report.skipped_records,
        initial_intent_counts=report.initial_intent_counts,
        final_responder_counts=report.final_responder_counts,
        rated_count=len(rated),
        unrated_count=len(by_session) - len(rated),
        rating_by_initial_intent={k: _mean_ci(v) for k, v in by_intent.items()},
        rating_by_final_responder={k: _mean_ci(v) for k, v in by_responder.items()},
    )


def format_report(report: LogReport) -> str:
    lines = [
        f"conversations: {report.conversation_count}",
        f"turns: {report.turn_count}",
        f"skipped records: {report.skipped_records}",
        "initial intents:",
    ]
    for intent, count in sorted(report.initial_intent_counts.items()):
        share = count / report.conversation_count if report.conversation_count else 0.0
        lines.append(f"  {intent}: {count} ({share:.1%})")
    lines.append("final responders:")
    for responder, count in sorted(report.final_responder_counts.items()):
        share = count / report.conversation_count if report.conversation_count else 0.0
        lines.append(f"  {responder}: {count} ({share:.1%})")
    if report.rated_count or report.unrated_count:
        lines.append(f"rated: {report.rated_count}, unrated: {report.unrated_count}")
        lines.append("mean rating by initial intent:")
        for intent, stat in sorted(report.rating_by_initial_intent.items()):
            lines.append("  " + _format_stat(intent, stat))
        lines.append("mean rating by final responder:")
        for responder, stat in sorted(report.rating_by_final_responder.items()):
            lines.append("  " + _format_stat(responder, stat))
    return "\n".join(lines)


def _format_stat(label: str, stat: RatedStat) -> str:
    if stat.mean is None:
        return f"{label}: n={stat.count}"
    if stat.ci95 is None:
        return f"{label}: n={stat.count} mean={stat.mean:.2f}"
    lo, hi = stat.ci95
    return f"{label}: n={stat.count} mean={stat.mean:.2f} ci95=[{lo:.2f}, {hi:.2f}]"

#!/usr/bin/env python3
"""Score the heuristic NLU components against the labeled fixture sets.

Prints domain-detection accuracy on the labeled utterance set and span-level
F1 for the dish and cooking-entity taggers.

Usage:
    python3 scripts/eval_fixtures.py
"""
from __future__ import annotations

import json
from pathlib import Path

from tasktalk.nlu import detect_domain
from tasktalk.recipes import tag_cooking_entities, tag_dish_name

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def f1(tp: int, fp: int, fn: int) -> float:
    return 2 * tp / (2 * tp + fp + fn) if tp else 0.0


def main() -> int:
    rows = []
    for line in (FIXTURES / "domain_labels.tsv").read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            rows.append(line.split("\t"))
    correct = sum(1 for utt, label in rows if detect_domain(utt).chosen.value == label)
    print(f"domain accuracy: {correct}/{len(rows)} = {correct / len(rows):.3f}")

    dish = [0, 0, 0]
    ents = [0, 0, 0]
    for line in (FIXTURES / "tagging_labels.jsonl").read_text(encoding="utf-8").splitlines():
        row = json.loads(line)
        pred_d = {s.text for s in tag_dish_name(row["utterance"])}
        gold_d = set(row["dishes"])
        dish[0] += len(pred_d & gold_d)
        dish[1] += len(pred_d - gold_d)
        dish[2] += len(gold_d - pred_d)
        pred_e = {(s.text, s.kind.value) for s in tag_cooking_entities(row["utterance"])}
        gold_e = {tuple(e) for e in row["entities"]}
        ents[0] += len(pred_e & gold_e)
        ents[1] += len(pred_e - gold_e)
        ents[2] += len(gold_e - pred_e)
    print(f"dish span F1: {f1(*dish):.3f}")
    print(f"entity span F1: {f1(*ents):.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

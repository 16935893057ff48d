"""Locating and parsing bundled data files (lexicons, gazetteers, corpora)."""
from __future__ import annotations

import os

_DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def data_path(*parts: str) -> str:
    return os.path.join(_DATA_DIR, *parts)


def load_weighted_lexicon(path: str) -> dict[str, float]:
    """Lexicon file: one `term<TAB>weight` per line, `#` starts a comment."""
    entries: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            term, _, weight = line.partition("\t")
            entries[term.strip().casefold()] = float(weight) if weight else 1.0
    return entries


def load_term_list(path: str) -> list[str]:
    """Gazetteer file: same format as lexicons; weights ignored."""
    return list(load_weighted_lexicon(path))


def load_tsv(path: str) -> list[list[str]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            rows.append(line.split("\t"))
    return rows

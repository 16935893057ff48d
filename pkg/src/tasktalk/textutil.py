"""Shared text helpers: tokenization, stemming, stopwords, normalization."""
from __future__ import annotations

import re
from functools import lru_cache

from .resources import data_path

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def normalize(text: str) -> str:
    return text.casefold().strip()


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens; punctuation acts as a separator."""
    return _TOKEN_RE.findall(text.casefold())


def stem(token: str) -> str:
    """Tiny suffix stripper (s/es/ing/ed plus a final-e fold) so that
    'fix/fixes/fixing/fixed' and 'bake/baking' collide."""
    t = token.casefold()
    for suffix in ("ing", "ed", "es", "s"):
        if t.endswith(suffix) and len(t) - len(suffix) >= 3:
            t = t[: -len(suffix)]
            break
    if t.endswith("e") and len(t) >= 4:
        t = t[:-1]
    return t


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    words = set()
    with open(data_path("stopwords.txt"), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line)
    return frozenset(words)


def content_tokens(text: str) -> list[str]:
    sw = stopwords()
    return [t for t in tokenize(text) if t not in sw]

"""Local search backends for tasks and recipes, DIY merge/rerank, the
ordered recipe fallback executor, and Levenshtein option selection."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from .diy import QueryKind, SearchQuery, entailment_score, formulate_queries
from .recipes import AttemptKind, RecipeConstraints, RecipeQueryPlan
from .resources import data_path
from .textutil import normalize, stem, tokenize


class CorpusError(Exception):
    """Corpus file failed validation; the whole file is rejected."""


class RetrievalError(Exception):
    pass


BM25_K1 = 1.2
BM25_B = 0.75
MUST_TITLE_BONUS = 2.0
DEFAULT_CONFIRM_THRESHOLD = 0.3


@dataclass(frozen=True)
class TaskDocument:
    id: str
    title: str
    steps: tuple[str, ...]
    tools: tuple[str, ...] = ()
    summary: str = ""
    popularity: int = 0


@dataclass(frozen=True)
class Ingredient:
    name: str
    quantity: str = ""


@dataclass(frozen=True)
class RecipeDocument:
    id: str
    name: str
    ingredients: tuple[Ingredient, ...]
    steps: tuple[str, ...]
    cuisine: Optional[str] = None
    meal_course: Optional[str] = None
    occasion: Optional[str] = None
    popularity: int = 0


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    score: float
    source_query_kind: str


def load_task_corpus(path: Optional[str] = None) -> list[TaskDocument]:
    path = path or data_path("corpora", "tasks.jsonl")
    docs, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: bad record: {exc}") from exc
            try:
                doc = TaskDocument(
                    id=rec["id"],
                    title=rec["title"],
                    steps=tuple(rec["steps"]),
                    tools=tuple(rec.get("tools", ())),
                    summary=rec.get("summary", ""),
                    popularity=int(rec.get("popularity", 0)),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad record: {exc!r}") from exc
            if not doc.title:
                raise CorpusError(f"{path}:{lineno}: empty title")
            if not doc.steps:
                raise CorpusError(f"{path}:{lineno}: task needs at least one step")
            if doc.id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate id {doc.id}")
            seen.add(doc.id)
            docs.append(doc)
    return docs


def load_recipe_corpus(path: Optional[str] = None) -> list[RecipeDocument]:
    path = path or data_path("corpora", "recipes.jsonl")
    docs, seen = [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: bad record: {exc}") from exc
            try:
                doc = RecipeDocument(
                    id=rec["id"],
                    name=rec["name"],
                    ingredients=tuple(
                        Ingredient(name=i["name"], quantity=i.get("quantity", ""))
                        for i in rec["ingredients"]
                    ),
                    steps=tuple(rec["steps"]),
                    cuisine=rec.get("cuisine"),
                    meal_course=rec.get("meal_course"),
                    occasion=rec.get("occasion"),
                    popularity=int(rec.get("popularity", 0)),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: bad record: {exc!r}") from exc
            if not doc.ingredients:
                raise CorpusError(f"{path}:{lineno}: recipe needs an ingredient")
            if not doc.steps:
                raise CorpusError(f"{path}:{lineno}: recipe needs at least one step")
            if doc.id in seen:
                raise CorpusError(f"{path}:{lineno}: duplicate id {doc.id}")
            seen.add(doc.id)
            docs.append(doc)
    return docs


class TaskIndex:
    """Immutable BM25-style index over task titles and steps."""

    def __init__(self, docs: list[TaskDocument]):
        self.docs = {d.id: d for d in docs}
        self._title_stems: dict[str, set[str]] = {}
        self._all_stems: dict[str, set[str]] = {}
        self._tf: dict[str, dict[str, int]] = {}
        self._dl: dict[str, int] = {}
        df: dict[str, int] = {}
        for d in docs:
            title_stems = {stem(t) for t in tokenize(d.title)}
            body = tokenize(d.title) + [t for s in d.steps for t in tokenize(s)]
            stems = [stem(t) for t in body]
            tf: dict[str, int] = {}
            for s in stems:
                tf[s] = tf.get(s, 0) + 1
            self._title_stems[d.id] = title_stems
            self._all_stems[d.id] = set(stems)
            self._tf[d.id] = tf
            self._dl[d.id] = len(stems)
            for s in set(stems):
                df[s] = df.get(s, 0) + 1
        self._df = df
        self._n = len(docs)
        self._avgdl = (sum(self._dl.values()) / self._n) if self._n else 0.0

    def has_term(self, doc_id: str, term: str) -> bool:
        return stem(term) in self._all_stems[doc_id]

    def title_has_term(self, doc_id: str, term: str) -> bool:
        return stem(term) in self._title_stems[doc_id]

    def bm25(self, doc_id: str, term: str) -> float:
        s = stem(term)
        tf = self._tf[doc_id].get(s, 0)
        if tf == 0:
            return 0.0
        df = self._df.get(s, 0)
        idf = math.log(1.0 + (self._n - df + 0.5) / (df + 0.5))
        dl = self._dl[doc_id]
        denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / self._avgdl)
        return idf * tf * (BM25_K1 + 1.0) / denom


class RecipeIndex:
    def __init__(self, docs: list[RecipeDocument]):
        self.docs = {d.id: d for d in docs}


def search_tasks(query: SearchQuery, index: TaskIndex) -> list[RankedResult]:
    """Must terms are required filters (stemmed, title or steps); Should
    terms only contribute BM25 score, plus a fixed bonus per Must term
    found in the title."""
    if not query.must_terms:
        raise RetrievalError("must_terms must be non-empty")
    results = []
    for doc_id in index.docs:
        if not all(index.has_term(doc_id, m) for m in query.must_terms):
            continue
        score = sum(index.bm25(doc_id, s) for s in query.should_terms)
        score += sum(
            MUST_TITLE_BONUS for m in query.must_terms if index.title_has_term(doc_id, m)
        )
        results.append(RankedResult(doc_id=doc_id, score=score, source_query_kind=query.kind.value))
    results.sort(key=lambda r: (-r.score, r.doc_id))
    return results


def retrieve_diy(
    utterance: str,
    index: TaskIndex,
    entailment_provider=None,
    top_per_query: int = 2,
) -> list[RankedResult]:
    """Run the three formulated queries, take top results from each, and
    rerank the merged pool by entailment of the title from the utterance."""
    queries = formulate_queries(utterance, entailment_provider=entailment_provider)
    pool: dict[str, RankedResult] = {}
    for q in queries:
        for r in search_tasks(q, index)[:top_per_query]:
            prev = pool.get(r.doc_id)
            if prev is None or r.score > prev.score:
                pool[r.doc_id] = r
    reranked = [
        RankedResult(
            doc_id=r.doc_id,
            score=entailment_score(utterance, index.docs[r.doc_id].title, provider=entailment_provider),
            source_query_kind=r.source_query_kind,
        )
        for r in pool.values()
    ]
    reranked.sort(key=lambda r: (-r.score, r.doc_id))
    return reranked[: 3 * top_per_query]


def search_recipes(constraints: RecipeConstraints, index: RecipeIndex) -> list[RankedResult]:
    """Dish name matches by normalized substring; categorical fields by
    equality; ingredients must all appear; negative ingredients must all
    be absent. Score counts the satisfied set constraints."""
    if constraints.is_empty():
        raise RetrievalError("at least one constraint must be set")
    results = []
    for doc in index.docs.values():
        matched = 0
        if constraints.dish_name is not None:
            if normalize(constraints.dish_name) not in normalize(doc.name):
                continue
            matched += 1
        for field_val, doc_val in (
            (constraints.cuisine, doc.cuisine),
            (constraints.meal_course, doc.meal_course),
            (constraints.occasion, doc.occasion),
        ):
            if field_val is not None:
                if doc_val is None or normalize(field_val) != normalize(doc_val):
                    matched = -1
                    break
                matched += 1
        if matched < 0:
            continue
        names = {stem(t) for ing in doc.ingredients for t in tokenize(ing.name)}
        ok = True
        for want in constraints.ingredients:
            if not all(stem(t) in names for t in tokenize(want)):
                ok = False
                break
        if ok:
            for bad in constraints.negative_ingredients:
                if all(stem(t) in names for t in tokenize(bad)):
                    ok = False
                    break
        if not ok:
            continue
        matched += len(constraints.ingredients) + len(constraints.negative_ingredients)
        results.append(RankedResult(doc_id=doc.id, score=float(matched), source_query_kind=""))
    results.sort(key=lambda r: (-r.score, r.doc_id))
    return results


def execute_recipe_plan(
    plan: RecipeQueryPlan,
    index: RecipeIndex,
    search_fn: Optional[Callable[[RecipeConstraints, RecipeIndex], list[RankedResult]]] = None,
) -> tuple[list[RankedResult], Optional[int]]:
    """Attempts run strictly in order; stop at the first non-empty result.
    Returns (results, 1-based attempt number) or ([], None) if all fail."""
    search = search_fn or search_recipes
    for i, attempt in enumerate(plan.attempts, 1):
        if attempt.skip:
            continue
        results = search(attempt.constraints, index)
        if results:
            results = [
                RankedResult(r.doc_id, r.score, attempt.kind.value) for r in results
            ]
            return results, i
    return [], None


# --- Levenshtein selection ---------------------------------------------------

def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance over casefolded strings."""
    a, b = a.casefold(), b.casefold()
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


_ORDINAL_WORDS = {
    "first": 1, "second": 2, "third": 3, "fourth": 4, "fifth": 5,
    "sixth": 6, "seventh": 7, "eighth": 8, "ninth": 9, "tenth": 10,
}
_CARDINAL_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}
_DIGIT_RE = re.compile(r"\b(\d+)(?:st|nd|rd|th)?\b")


def parse_ordinal(utterance: str, n_options: int) -> Optional[int]:
    """1-based option number named by order, or None."""
    tokens = tokenize(utterance)
    for tok in tokens:
        if tok in _ORDINAL_WORDS and _ORDINAL_WORDS[tok] <= n_options:
            return _ORDINAL_WORDS[tok]
    m = _DIGIT_RE.search(utterance)
    if m and 1 <= int(m.group(1)) <= n_options:
        return int(m.group(1))
    # bare cardinal words only count in short selection phrases
    # ("number two", "two") to avoid firing inside task names
    filler = {"number", "option", "item", "the", "give", "me", "take", "pick", "choose", "i", "want", "ll"}
    content = [t for t in tokens if t not in filler]
    if len(content) == 1 and content[0] in _CARDINAL_WORDS:
        val = _CARDINAL_WORDS[content[0]]
        if val <= n_options:
            return val
    return None


def match_selection(
    utterance: str,
    options: list[str],
    threshold: float = DEFAULT_CONFIRM_THRESHOLD,
) -> tuple[int, float, bool]:
    """Pick an option by order or by name similarity.

    Returns (0-based index, normalized distance, needs_confirmation).
    """
    if not options:
        raise RetrievalError("options must be non-empty")
    ordinal = parse_ordinal(utterance, len(options))
    if ordinal is not None:
        return ordinal - 1, 0.0, False
    text = normalize(utterance)
    # a name spoken verbatim inside exactly one option is unambiguous
    if len(text) >= 3:
        containing = [i for i, option in enumerate(options) if text in normalize(option)]
        if len(containing) == 1:
            return containing[0], 0.0, False
    best_idx, best_dist = 0, math.inf
    for i, option in enumerate(options):
        opt = normalize(option)
        denom = max(len(text), len(opt)) or 1
        dist = levenshtein(text, opt) / denom
        if dist < best_dist:
            best_idx, best_dist = i, dist
    return best_idx, best_dist, best_dist > threshold

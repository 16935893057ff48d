"""Question answering: type classification, quantity/substitution rules,
conversational input formatting, extractive answers, and evaluation metrics."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional

from .resources import data_path, load_tsv
from .retrieval import RecipeDocument, levenshtein
from .textutil import content_tokens, normalize, stem, tokenize

NO_ANSWER_TEXT = "I don't know the answer to that one."
EXTRACTIVE_THRESHOLD = 0.15
QUANTITY_MATCH_THRESHOLD = 0.25
DEPLOYED_HISTORY_TURNS = 1  # single previous turn
HISTORY_TURN_CHOICES = (0, 1, 5)


class QaError(Exception):
    pass


class QuestionType(str, Enum):
    QUANTITY_RELATED = "QuantityRelated"
    TIME_RELATED = "TimeRelated"
    CONTEXT_DEPENDENT = "ContextDependent"
    OTHERS = "Others"


@dataclass(frozen=True)
class QAContext:
    task_context: str
    history: tuple[tuple[str, str], ...]
    question: str
    k: int = DEPLOYED_HISTORY_TURNS

    def __post_init__(self):
        if self.k not in HISTORY_TURN_CHOICES:
            raise QaError(f"k must be one of {HISTORY_TURN_CHOICES}")


@dataclass(frozen=True)
class QAAnswer:
    text: str
    source: str  # QuantityRule | SubstitutionRule | Extractive | None
    confidence: float

    @classmethod
    def none(cls) -> "QAAnswer":
        return cls(text=NO_ANSWER_TEXT, source="None", confidence=0.0)


_QUANTITY_RE = re.compile(r"\b(how many|how much|quantity|amount of)\b")
_TIME_RE = re.compile(r"\b(how long|when|minutes?|hours?|how much time|what time)\b")
_PRONOUNS = {"it", "that", "them", "this", "they", "those", "these", "one"}
SUBSTITUTION_CUES = ("instead of", "substitute", "replace", "replacement", "swap")


def classify_question_type(question: str, history=()) -> QuestionType:
    text = normalize(question)
    if _QUANTITY_RE.search(text):
        return QuestionType.QUANTITY_RELATED
    if _TIME_RE.search(text):
        return QuestionType.TIME_RELATED
    tokens = tokenize(text)
    if _PRONOUNS & set(tokens):
        # a pronoun with no in-question noun antecedent needs history
        from .diy import PosTag, tag_pos

        nouns = [t for t, tag in tag_pos(text) if tag is PosTag.NOUN]
        if not nouns:
            return QuestionType.CONTEXT_DEPENDENT
    return QuestionType.OTHERS


# --- rule-based answers ------------------------------------------------------

def answer_quantity(recipe: RecipeDocument, question: str) -> QAAnswer:
    """Fuzzy-match the questioned ingredient against the recipe; the answer
    quotes the recipe's quantity string verbatim."""
    q_tokens = [t for t in tokenize(question) if t not in ("how", "many", "much", "do", "i", "need", "to", "the", "a")]
    best: Optional[tuple[float, int]] = None
    for idx, ing in enumerate(recipe.ingredients):
        name = normalize(ing.name)
        for tok in q_tokens:
            denom = max(len(tok), len(name)) or 1
            dist = levenshtein(tok, name) / denom
            if dist <= QUANTITY_MATCH_THRESHOLD and (best is None or dist < best[0]):
                best = (dist, idx)
    if best is None:
        return QAAnswer.none()
    ing = recipe.ingredients[best[1]]
    if not ing.quantity:
        return QAAnswer(text=f"The recipe calls for {ing.name}, but doesn't say how much.",
                        source="QuantityRule", confidence=0.5)
    return QAAnswer(text=f"You need {ing.quantity} {ing.name}.", source="QuantityRule",
                    confidence=1.0 - best[0])


@lru_cache(maxsize=1)
def substitution_table() -> dict[str, str]:
    return {row[0]: row[1] for row in load_tsv(data_path("substitutions.tsv"))}


def answer_substitution(recipe, ingredient_query: str, table: Optional[dict[str, str]] = None) -> QAAnswer:
    """Leftmost ingredient mention wins; lookup in the shipped table."""
    table = table if table is not None else substitution_table()
    tokens = tokenize(ingredient_query)
    # try bigrams first so "peanut butter" beats "butter"
    for i in range(len(tokens) - 1):
        key = f"{tokens[i]} {tokens[i + 1]}"
        if key in table:
            return QAAnswer(text=f"Instead of {key}, you can use {table[key]}.",
                            source="SubstitutionRule", confidence=0.9)
    for tok in tokens:
        if tok in table:
            return QAAnswer(text=f"Instead of {tok}, you can use {table[tok]}.",
                            source="SubstitutionRule", confidence=0.9)
    return QAAnswer.none()


# --- conversational formatting ------------------------------------------------

def format_conv_qa_input(ctx: QAContext) -> str:
    """Context, then the last k question/answer pairs marked "Q:"/"A:",
    then the current question."""
    parts = [ctx.task_context, "\n"]
    for q, a in ctx.history[-ctx.k:] if ctx.k else ():
        parts.append(f"Q: {q} A: {a} ")
    parts.append(f"Q: {ctx.question}")
    return "".join(parts)


# --- extractive answering -----------------------------------------------------

_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+|\n+")
_CLAUSE_SPLIT_RE = re.compile(r"(?<=[,;])\s+")


def _idf_weights(sentences: list[str]) -> dict[str, float]:
    df: dict[str, int] = {}
    for s in sentences:
        for t in {stem(t) for t in tokenize(s)}:
            df[t] = df.get(t, 0) + 1
    n = len(sentences) or 1
    return {t: math.log((n + 1) / (d + 1)) + 1.0 for t, d in df.items()}


class HeuristicExtractiveProvider:
    """Sentence retrieval by IDF-weighted content-word overlap, trimmed to
    the clause holding the best-matching term."""

    def answer(self, formatted_input: str, task_context: str, threshold: float) -> QAAnswer:
        sentences = [s.strip() for s in _SENT_SPLIT_RE.split(task_context) if s.strip()]
        if not sentences:
            return QAAnswer.none()
        idf = _idf_weights(sentences)

        def w(s: str) -> float:
            return idf.get(s, max(idf.values(), default=1.0))

        # the live question is the text after the final "Q:" marker
        question = formatted_input.rsplit("Q:", 1)[-1]
        query = {stem(t) for t in content_tokens(question)}
        if not query:
            return QAAnswer.none()
        best_sent, best_score, best_matched = None, 0.0, set()
        denom = sum(w(s) for s in query)
        for sent in sentences:
            sent_stems = {stem(t) for t in tokenize(sent)}
            matched = query & sent_stems
            score = sum(w(s) for s in matched) / denom if denom else 0.0
            if score > best_score:
                best_sent, best_score, best_matched = sent, score, matched
        if best_sent is None or best_score < threshold:
            return QAAnswer.none()
        clauses = _CLAUSE_SPLIT_RE.split(best_sent)
        if len(clauses) > 1 and best_matched:
            top_term = max(best_matched, key=w)
            for clause in clauses:
                if top_term in {stem(t) for t in tokenize(clause)}:
                    # clause must stay a contiguous substring of the context
                    if clause in task_context:
                        return QAAnswer(text=clause, source="Extractive", confidence=best_score)
        return QAAnswer(text=best_sent, source="Extractive", confidence=best_score)


class RemoteExtractiveProvider:
    """POST {input, context} -> {text}; heuristic fallback on error."""

    def __init__(self, url: str, fallback=None, timeout: float = 2.0):
        self.url = url
        self.fallback = fallback or HeuristicExtractiveProvider()
        self.timeout = timeout
        self.last_degraded = False

    def answer(self, formatted_input: str, task_context: str, threshold: float) -> QAAnswer:
        import httpx

        self.last_degraded = False
        try:
            resp = httpx.post(
                self.url,
                json={"input": formatted_input, "context": task_context},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            text = str(resp.json()["text"])
            if text and text in task_context:
                return QAAnswer(text=text, source="Extractive", confidence=0.9)
            return QAAnswer.none()
        except Exception:
            self.last_degraded = True
            return self.fallback.answer(formatted_input, task_context, threshold)


_default_extractive: Optional[HeuristicExtractiveProvider] = None


def default_extractive_provider() -> HeuristicExtractiveProvider:
    global _default_extractive
    if _default_extractive is None:
        _default_extractive = HeuristicExtractiveProvider()
    return _default_extractive


def extractive_answer(ctx: QAContext, provider=None, threshold: float = EXTRACTIVE_THRESHOLD) -> QAAnswer:
    provider = provider or default_extractive_provider()
    formatted = format_conv_qa_input(ctx)
    return provider.answer(formatted, ctx.task_context, threshold)


# --- evaluation metrics -------------------------------------------------------

def _metric_normalize(text: str) -> str:
    return " ".join(normalize(text).split())


def fuzzy_match_score(gold: str, pred: str) -> float:
    """100 * (1 - edit_distance / max(len)) over normalized strings."""
    g, p = _metric_normalize(gold), _metric_normalize(pred)
    if not g and not p:
        return 100.0
    denom = max(len(g), len(p))
    return 100.0 * (1.0 - levenshtein(g, p) / denom)


def _metric_tokens(text: str) -> list[str]:
    return re.sub(r"[^\w\s]", " ", text.casefold()).split()


def token_f1(gold: str, pred: str) -> float:
    g, p = _metric_tokens(gold), _metric_tokens(pred)
    if not g and not p:
        return 1.0
    if not g or not p:
        return 0.0
    g_counts: dict[str, int] = {}
    for t in g:
        g_counts[t] = g_counts.get(t, 0) + 1
    overlap = 0
    for t in p:
        if g_counts.get(t, 0) > 0:
            overlap += 1
            g_counts[t] -= 1
    if overlap == 0:
        return 0.0
    precision = overlap / len(p)
    recall = overlap / len(g)
    return 2 * precision * recall / (precision + recall)


def exact_match(gold: str, pred: str) -> int:
    return int(_metric_normalize(gold) == _metric_normalize(pred))


# --- evaluation harness -------------------------------------------------------

@dataclass
class EvalRow:
    context: str
    history: tuple[tuple[str, str], ...]
    question: str
    gold: str
    question_type: str


def load_eval_records(path: str) -> list[EvalRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            rows.append(
                EvalRow(
                    context=rec["context"],
                    history=tuple((h[0], h[1]) for h in rec.get("history", ())),
                    question=rec["question"],
                    gold=rec["gold"],
                    question_type=rec.get("question_type", "Others"),
                )
            )
    return rows


def evaluate(rows: list[EvalRow], ks=HISTORY_TURN_CHOICES, provider=None) -> dict:
    """Per-k and per-type fuzzy/F1/EM means over an evaluation file."""
    report: dict = {}
    for k in ks:
        per_type: dict[str, list[tuple[float, float, int]]] = {}
        overall: list[tuple[float, float, int]] = []
        for row in rows:
            ctx = QAContext(task_context=row.context, history=row.history, question=row.question, k=k)
            answer = extractive_answer(ctx, provider=provider)
            pred = answer.text if answer.source != "None" else ""
            triple = (
                fuzzy_match_score(row.gold, pred),
                token_f1(row.gold, pred),
                exact_match(row.gold, pred),
            )
            overall.append(triple)
            per_type.setdefault(row.question_type, []).append(triple)

        def summarize(triples):
            n = len(triples)
            return {
                "count": n,
                "fuzzy": sum(t[0] for t in triples) / n,
                "f1": sum(t[1] for t in triples) / n,
                "em": sum(t[2] for t in triples) / n,
            }

        report[k] = {
            "overall": summarize(overall),
            "by_type": {t: summarize(v) for t, v in sorted(per_type.items())},
        }
    return report

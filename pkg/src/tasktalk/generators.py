"""Response generators: launch greeting, recommendations, social chat,
option presentation, and task-content rendering with fun facts."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .resources import data_path, load_tsv
from .retrieval import RankedResult, RecipeDocument, TaskDocument
from .state import ConversationState, TaskSession
from .textutil import stem, tokenize

SPEECH_BUDGET = 600
PROMPT_BUDGET = 160
FUN_FACT_THRESHOLD = 0.2

DEFAULT_PERSONA_SENTENCE = "I enjoy helping people with cooking and home improvement projects."

# ranker tiers; config may override (lower = stronger)
DEFAULT_TIERS = {
    "safety-deflection": 0,
    "launch": 1,
    "task-content": 1,
    "task-content-ingredients": 1,
    "task-completed": 1,
    "confirm-step": 1,
    "changing-task": 1,
    "navigation": 1,
    "qa": 2,
    "show-explicit-options": 3,
    "show-alternative-options": 3,
    "recommender": 4,
    "social-chat": 5,
    "elicitation": 5,
    "fallback": 6,
}

PROACTIVE_SUGGESTIONS = (
    "baking banana bread",
    "fixing a leaky faucet",
    "making fluffy pancakes",
    "planting a vegetable garden",
    "cooking a margherita pizza",
    "building a simple shelf",
)

ALTERNATIVE_SUGGESTIONS = ("baking banana bread", "fixing a leaky faucet")


class GeneratorError(Exception):
    pass


@dataclass(frozen=True)
class ResponseCandidate:
    text: str
    responder_id: str
    tier: int
    confidence: float

    def __post_init__(self):
        if not self.text:
            raise GeneratorError("candidate text must be non-empty")
        if len(self.text) > SPEECH_BUDGET:
            raise GeneratorError("candidate text over speech budget")


@dataclass(frozen=True)
class PersonaConfig:
    persona_sentence: str = DEFAULT_PERSONA_SENTENCE
    max_social_turns: int = 2


@dataclass(frozen=True)
class FunFact:
    topic_terms: tuple[str, ...]
    text: str


def make_candidate(text: str, responder_id: str, confidence: float = 1.0, tiers=None) -> ResponseCandidate:
    tiers = tiers or DEFAULT_TIERS
    text = text.strip()
    if len(text) > SPEECH_BUDGET:
        text = text[: SPEECH_BUDGET - 1].rstrip() + "…"
    return ResponseCandidate(
        text=text,
        responder_id=responder_id,
        tier=tiers.get(responder_id, max(tiers.values())),
        confidence=confidence,
    )


@lru_cache(maxsize=1)
def _templates() -> dict[str, list[str]]:
    grouped: dict[str, list[str]] = {}
    for row in load_tsv(data_path("templates.tsv")):
        grouped.setdefault(row[0], []).append(row[1])
    return grouped


def _template(key: str, index: int = 0, **kwargs) -> str:
    options = _templates()[key]
    return options[index % len(options)].format(**kwargs)


def _stable_hash(text: str) -> int:
    return zlib.crc32(text.encode("utf-8"))


# --- launch ------------------------------------------------------------------

def launch_greeting(session_id: str, turn_index: int) -> ResponseCandidate:
    """First-turn greeting plus one proactive suggestion; the suggestion
    rotates deterministically across sessions so replays stay stable."""
    if turn_index != 0:
        raise GeneratorError("launch greeting is only valid on the first turn")
    suggestion = PROACTIVE_SUGGESTIONS[_stable_hash(session_id) % len(PROACTIVE_SUGGESTIONS)]
    text = (
        "Hi! I can help you with home improvement projects and cooking. "
        f"For example, how about {suggestion}? "
        "Tell me what you'd like to do, or ask for a recommendation."
    )
    return make_candidate(text, "launch")


# --- recommender -------------------------------------------------------------

def recommend(
    domain: Optional[str],
    state: ConversationState,
    task_docs: list[TaskDocument],
    recipe_docs: list[RecipeDocument],
    prompt_provider=None,
    count: int = 3,
) -> tuple[ResponseCandidate, list[tuple[str, str]]]:
    """Up to `count` fresh options by popularity; skips anything already
    recommended in this conversation. Returns (candidate, [(id, title)])."""
    exclude = set(state.recommended_ids)
    tasks = sorted(task_docs, key=lambda d: (-d.popularity, d.id))
    recipes = sorted(recipe_docs, key=lambda d: (-d.popularity, d.id))
    pool: list[tuple[str, str]] = []
    if domain == "Cooking":
        pool = [(d.id, d.name) for d in recipes]
    elif domain == "DIY":
        pool = [(d.id, d.title) for d in tasks]
    else:
        # no stated domain: interleave, DIY first
        for t, r in zip(tasks, recipes):
            pool.append((t.id, t.title))
            pool.append((r.id, r.name))
    picks = [(i, t) for i, t in pool if i not in exclude][:count]
    if not picks:
        return (
            make_candidate(
                _template("alternative", alt1=ALTERNATIVE_SUGGESTIONS[0], alt2=ALTERNATIVE_SUGGESTIONS[1]),
                "show-alternative-options",
            ),
            [],
        )
    lines = [
        f"{n}. {conversational_prompt_for_task(title, provider=prompt_provider)}"
        for n, (_, title) in enumerate(picks, 1)
    ]
    text = "Here are some ideas. " + " ".join(lines) + " Say a name or a number to pick one."
    return make_candidate(text, "recommender"), picks


def conversational_prompt_for_task(task_name: str, provider=None) -> str:
    """One-sentence conversational pitch containing the task name verbatim."""
    if not task_name or not task_name.strip():
        raise GeneratorError("task_name must be non-empty")
    if provider is not None:
        try:
            text = provider.generate(task_name)
            if task_name in text and len(text) <= PROMPT_BUDGET:
                return text
        except Exception:
            pass  # degrade to templates
    templates = _templates()["task_prompt"]
    text = templates[_stable_hash(task_name) % len(templates)].format(task=task_name)
    return text[:PROMPT_BUDGET]


class RemoteGenerativeProvider:
    """POST {task_name} -> {text}; callers fall back to templates on error."""

    def __init__(self, url: str, timeout: float = 2.0):
        self.url = url
        self.timeout = timeout

    def generate(self, task_name: str) -> str:
        import httpx

        resp = httpx.post(self.url, json={"task_name": task_name}, timeout=self.timeout)
        resp.raise_for_status()
        return str(resp.json()["text"])


# --- social chat -------------------------------------------------------------

_GREETING_WORDS = {"hi", "hello", "hey", "greetings", "howdy"}


def social_chat(
    utterance: str,
    state: ConversationState,
    persona: Optional[PersonaConfig] = None,
) -> Optional[ResponseCandidate]:
    """Canned persona-grounded small talk, always redirecting back to the
    two target domains. Abstains once the per-conversation budget is spent."""
    persona = persona or PersonaConfig()
    if state.social_chat_turns_used >= persona.max_social_turns:
        return None
    tokens = set(tokenize(utterance))
    text = utterance.casefold()
    if "yourself" in tokens or "who are you" in text or "about you" in text:
        opener = _template("social_about", persona=persona.persona_sentence)
    elif "how are you" in text or "feeling" in tokens:
        opener = _template("social_feelings")
    elif tokens & _GREETING_WORDS:
        opener = _template("social_greeting")
    else:
        opener = _template("social_other")
    return make_candidate(f"{opener} {_template('redirect')}", "social-chat", confidence=0.6)


def elicitation() -> ResponseCandidate:
    return make_candidate(_template("elicit"), "elicitation", confidence=0.5)


def safety_deflection() -> ResponseCandidate:
    return make_candidate(_template("safety"), "safety-deflection")


def changing_task_deflection() -> ResponseCandidate:
    return make_candidate(_template("changing_task"), "changing-task")


def fallback_response() -> ResponseCandidate:
    return make_candidate(_template("fallback"), "fallback", confidence=0.1)


# --- option presentation -----------------------------------------------------

def present_options(
    results: list[RankedResult],
    titles_by_id: dict[str, str],
    max_options: int = 3,
) -> tuple[ResponseCandidate, list[tuple[str, str]]]:
    """Numbered spoken list of up to `max_options` items, or the
    alternative-options variant when nothing was retrieved."""
    shown = [(r.doc_id, titles_by_id[r.doc_id]) for r in results[:max_options]]
    if not shown:
        text = _template("alternative", alt1=ALTERNATIVE_SUGGESTIONS[0], alt2=ALTERNATIVE_SUGGESTIONS[1])
        return make_candidate(text, "show-alternative-options"), []
    if len(shown) == 1:
        text = f"I found {shown[0][1]}. Should we start it?"
        return make_candidate(text, "show-explicit-options"), shown
    lines = [f"{n}. {title}." for n, (_, title) in enumerate(shown, 1)]
    text = "Here is what I found: " + " ".join(lines) + " Choose one by name or number."
    return make_candidate(text, "show-explicit-options"), shown


# --- task content ------------------------------------------------------------

@lru_cache(maxsize=1)
def load_fun_facts() -> tuple[FunFact, ...]:
    facts = []
    for row in load_tsv(data_path("fun_facts.tsv")):
        terms = tuple(t.strip() for t in row[0].split(",") if t.strip())
        facts.append(FunFact(topic_terms=terms, text=row[1]))
    return tuple(facts)


class FunFactTable:
    """TF-IDF vectors over fact texts for cosine lookup."""

    def __init__(self, facts: tuple[FunFact, ...]):
        self.facts = facts
        docs = [[stem(t) for t in (list(f.topic_terms) + tokenize(f.text))] for f in facts]
        df: dict[str, int] = {}
        for doc in docs:
            for s in set(doc):
                df[s] = df.get(s, 0) + 1
        n = len(docs) or 1
        self._idf = {s: math.log((n + 1) / (d + 1)) + 1.0 for s, d in df.items()}
        self._vectors = [self._vectorize(doc) for doc in docs]

    def _vectorize(self, stems: list[str]) -> dict[str, float]:
        tf: dict[str, float] = {}
        for s in stems:
            tf[s] = tf.get(s, 0.0) + 1.0
        vec = {s: c * self._idf.get(s, 1.0) for s, c in tf.items()}
        norm = math.sqrt(sum(v * v for v in vec.values()))
        return {s: v / norm for s, v in vec.items()} if norm else {}

    def best(self, query_text: str) -> tuple[Optional[FunFact], float]:
        qvec = self._vectorize([stem(t) for t in tokenize(query_text)])
        best_fact, best_cos = None, 0.0
        for fact, vec in zip(self.facts, self._vectors):
            cos = sum(qvec.get(s, 0.0) * v for s, v in vec.items())
            if cos > best_cos:
                best_fact, best_cos = fact, cos
        return best_fact, best_cos


_fact_table: Optional[FunFactTable] = None


def default_fact_table() -> FunFactTable:
    global _fact_table
    if _fact_table is None:
        _fact_table = FunFactTable(load_fun_facts())
    return _fact_table


def fun_fact_lookup(
    query_text: str,
    facts: Optional[tuple[FunFact, ...]] = None,
    threshold: float = FUN_FACT_THRESHOLD,
) -> Optional[FunFact]:
    table = default_fact_table() if facts is None else FunFactTable(tuple(facts))
    fact, cos = table.best(query_text)
    return fact if fact is not None and cos >= threshold else None


def render_step(
    session: TaskSession,
    doc,
    include_fun_fact: bool = True,
    fact_threshold: float = FUN_FACT_THRESHOLD,
    responder_id: str = "task-content",
) -> ResponseCandidate:
    if not session.started:
        raise GeneratorError("task session not started")
    steps = doc.steps
    i, n = session.step_index, len(steps)
    text = f"Step {i + 1} of {n}: {steps[i]}"
    if include_fun_fact:
        fact = fun_fact_lookup(steps[i], threshold=fact_threshold)
        if fact:
            text += f" {fact.text}"
    if (i + 1) % 3 == 0 and i + 1 < n:
        text += ' You can say "next", "repeat", or "previous".'
    return make_candidate(text, responder_id)


def render_ingredients(doc: RecipeDocument) -> ResponseCandidate:
    if not isinstance(doc, RecipeDocument):
        raise GeneratorError("ingredients are only available for recipes")
    parts = [
        f"{ing.quantity} {ing.name}".strip() if ing.quantity else ing.name
        for ing in doc.ingredients
    ]
    if len(parts) > 8:
        first, rest = parts[:8], parts[8:]
        text = "You will need: " + ", ".join(first) + ". And also: " + ", ".join(rest) + "."
    else:
        text = "You will need: " + ", ".join(parts) + "."
    return make_candidate(text, "task-content-ingredients")

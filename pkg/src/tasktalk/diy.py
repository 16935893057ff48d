"""DIY request understanding: turn a home-improvement utterance into three
ranked Must/Should search queries.

Pipeline: commonsense inference fills in the implied goal, the paraphraser
rewrites the request into "How to ..." form, an entailment scorer ranks the
rewrites, and role extraction over PoS tags yields the action-centric,
object-centric, and intent-fallback queries.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional

from .resources import data_path, load_tsv
from .textutil import content_tokens, normalize, stem, stopwords, tokenize


class DiyError(Exception):
    pass


class VerbMissing(DiyError):
    """No main verb could be extracted; caller falls back to object-centric."""


class CommonsenseRelation(str, Enum):
    XWANT = "xWant"  # As a result, PersonX wants
    XINTENT = "xIntent"  # PersonX then


class PosTag(str, Enum):
    NOUN = "Noun"
    VERB = "Verb"
    ADJECTIVE = "Adjective"
    ADVERB = "Adverb"
    PRONOUN = "Pronoun"
    CONJUNCTION = "Conjunction"
    PREPOSITION = "Preposition"
    INTERJECTION = "Interjection"
    OTHER = "Other"


class QueryKind(str, Enum):
    ACTION_CENTRIC = "ActionCentric"
    OBJECT_CENTRIC = "ObjectCentric"
    INTENT_FALLBACK = "IntentFallback"


@dataclass(frozen=True)
class ParaphraseCandidate:
    text: str
    rank_score: float


@dataclass(frozen=True)
class PredicateArgument:
    verb: str
    arg1: str
    arg1_head_noun: str
    remainder_terms: tuple[str, ...]


@dataclass(frozen=True)
class SearchQuery:
    kind: QueryKind
    must_terms: tuple[str, ...]
    should_terms: tuple[str, ...]

    def __post_init__(self):
        if not self.must_terms:
            raise DiyError("must_terms must be non-empty")
        if set(self.must_terms) & set(self.should_terms):
            raise DiyError("must/should term sets overlap")


_AUXILIARIES = frozenset(
    "is are was were be been am can could will would should shall may might "
    "must do does did have has had".split()
)

_NP_TAGS = {PosTag.NOUN, PosTag.ADJECTIVE, PosTag.OTHER, PosTag.PRONOUN}


# --- PoS tagging -------------------------------------------------------------

@lru_cache(maxsize=1)
def _pos_lexicon() -> dict[str, str]:
    return {row[0]: row[1] for row in load_tsv(data_path("pos_lexicon.tsv"))}


def tag_pos(sentence: str) -> list[tuple[str, PosTag]]:
    """Closed-lexicon tagger with suffix-rule fallback.

    Noun/verb-ambiguous words resolve to Verb right after "to" or in the
    sentence-initial imperative slot, otherwise Noun.
    """
    lex = _pos_lexicon()
    tokens = tokenize(sentence)
    tagged: list[tuple[str, PosTag]] = []
    for i, tok in enumerate(tokens):
        entry = lex.get(tok)
        if entry == "NounVerb":
            prev = tokens[i - 1] if i > 0 else None
            tag = PosTag.VERB if prev in (None, "to") else PosTag.NOUN
        elif entry:
            tag = PosTag(entry)
        elif tok.endswith("ly"):
            tag = PosTag.ADVERB
        elif tok.endswith("ing") or tok.endswith("ed"):
            tag = PosTag.VERB
        else:
            tag = PosTag.NOUN
        tagged.append((tok, tag))
    return tagged


# --- commonsense inference ---------------------------------------------------

@lru_cache(maxsize=1)
def _commonsense_rows() -> dict[str, tuple[str, str]]:
    rows = {}
    for row in load_tsv(data_path("commonsense.tsv")):
        trigger, remedy, desired = row[0], row[1], row[2]
        rows[trigger] = (remedy, desired)
    return rows


@lru_cache(maxsize=1)
def _object_aliases() -> dict[str, str]:
    return {row[0]: row[1] for row in load_tsv(data_path("object_aliases.tsv"))}


@lru_cache(maxsize=1)
def remedy_pairs() -> frozenset[tuple[str, str]]:
    """(problem stem, remedy-verb stem) pairs; used as soft matches by the
    entailment scorer."""
    pairs = set()
    for trigger, (remedy, _) in _commonsense_rows().items():
        pairs.add((stem(trigger), stem(remedy)))
    return frozenset(pairs)


class HeuristicCommonsenseProvider:
    """Problem-term -> remedy-verb lexicon standing in for a learned
    commonsense model."""

    def infer(self, utterance: str, relation: CommonsenseRelation) -> str:
        rows = _commonsense_rows()
        tokens = tokenize(utterance)
        trigger_idx, remedy, desired = None, None, None
        for i, tok in enumerate(tokens):
            hit = rows.get(tok) or rows.get(stem(tok))
            if hit:
                trigger_idx, (remedy, desired) = i, hit
                break
        if remedy is None:
            return ""
        obj = _nearest_noun(tokens, trigger_idx)
        obj = _object_aliases().get(obj, obj) if obj else obj
        if relation is CommonsenseRelation.XWANT:
            return f"how to {remedy} the {obj}" if obj else f"how to {remedy}"
        article = "an" if desired[:1] in "aeiou" else "a"
        if obj:
            return f"to have {article} {desired} {obj}"
        return f"to have it {desired}"


def _nearest_noun(tokens: list[str], anchor: int) -> str:
    tagged = tag_pos(" ".join(tokens))
    nouns = [i for i, (_, tag) in enumerate(tagged) if tag is PosTag.NOUN and i != anchor]
    if not nouns:
        return ""
    return tokens[min(nouns, key=lambda i: (abs(i - anchor), i))]


class RemoteCommonsenseProvider:
    """POST {utterance, relation} -> {text}; heuristic fallback on error."""

    def __init__(self, url: str, fallback=None, timeout: float = 2.0):
        self.url = url
        self.fallback = fallback or HeuristicCommonsenseProvider()
        self.timeout = timeout
        self.last_degraded = False

    def infer(self, utterance: str, relation: CommonsenseRelation) -> str:
        import httpx

        self.last_degraded = False
        try:
            resp = httpx.post(
                self.url,
                json={"utterance": utterance, "relation": relation.value},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return str(resp.json()["text"])
        except Exception:
            self.last_degraded = True
            return self.fallback.infer(utterance, relation)


_default_commonsense: Optional[HeuristicCommonsenseProvider] = None


def default_commonsense_provider() -> HeuristicCommonsenseProvider:
    global _default_commonsense
    if _default_commonsense is None:
        _default_commonsense = HeuristicCommonsenseProvider()
    return _default_commonsense


def infer_commonsense(
    utterance: str,
    relation: CommonsenseRelation,
    provider=None,
) -> str:
    if not utterance or not utterance.strip():
        raise DiyError("empty utterance")
    provider = provider or default_commonsense_provider()
    return provider.infer(utterance, relation)


# --- entailment scoring ------------------------------------------------------

@lru_cache(maxsize=1)
def _idf_table() -> dict[str, float]:
    """Stem -> IDF computed over the bundled task corpus."""
    docs = []
    with open(data_path("corpora", "tasks.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            text = rec["title"] + " " + " ".join(rec["steps"])
            docs.append({stem(t) for t in tokenize(text)})
    n = len(docs)
    df: dict[str, int] = {}
    for doc in docs:
        for s in doc:
            df[s] = df.get(s, 0) + 1
    return {s: math.log((n + 1) / (d + 1)) + 1.0 for s, d in df.items()}


def _idf(s: str) -> float:
    table = _idf_table()
    return table.get(s, max(table.values()))


class HeuristicEntailmentProvider:
    """IDF-weighted Jaccard over content-word stems; problem/remedy verb
    pairs from the commonsense lexicon count as half matches."""

    def score(self, premise: str, hypothesis: str) -> float:
        p = {stem(t) for t in content_tokens(premise)}
        h = {stem(t) for t in content_tokens(hypothesis)}
        if not p or not h:
            return 0.0
        exact = p & h
        pairs = remedy_pairs()
        fuzzy_weight = 0.0
        unmatched_p = p - exact
        unmatched_h = h - exact
        for a in sorted(unmatched_p):
            for b in sorted(unmatched_h):
                if (a, b) in pairs or (b, a) in pairs:
                    fuzzy_weight += 0.5 * min(_idf(a), _idf(b))
                    unmatched_h = unmatched_h - {b}
                    break
        union = p | h
        numer = sum(_idf(s) for s in exact) + fuzzy_weight
        denom = sum(_idf(s) for s in union)
        return numer / denom if denom else 0.0


class RemoteEntailmentProvider:
    """POST {utterance, hypotheses[]} -> {scores[]}; heuristic fallback."""

    def __init__(self, url: str, fallback=None, timeout: float = 2.0):
        self.url = url
        self.fallback = fallback or HeuristicEntailmentProvider()
        self.timeout = timeout
        self.last_degraded = False

    def score(self, premise: str, hypothesis: str) -> float:
        import httpx

        self.last_degraded = False
        try:
            resp = httpx.post(
                self.url,
                json={"utterance": premise, "hypotheses": [hypothesis]},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return float(resp.json()["scores"][0])
        except Exception:
            self.last_degraded = True
            return self.fallback.score(premise, hypothesis)


_default_entailment: Optional[HeuristicEntailmentProvider] = None


def default_entailment_provider() -> HeuristicEntailmentProvider:
    global _default_entailment
    if _default_entailment is None:
        _default_entailment = HeuristicEntailmentProvider()
    return _default_entailment


def entailment_score(premise: str, hypothesis: str, provider=None) -> float:
    if not premise or not premise.strip() or not hypothesis or not hypothesis.strip():
        raise DiyError("premise and hypothesis must be non-empty")
    provider = provider or default_entailment_provider()
    return max(0.0, min(1.0, provider.score(premise, hypothesis)))


# --- paraphrasing ------------------------------------------------------------

_LEADIN_RE = re.compile(
    r"^(how to|how do i|how do you|how can i|how does one|what is the best way to|"
    r"what's the best way to|i want to|i wanna|i need to|i would like to|i'd like to|"
    r"can you tell me how to|tell me how to|help me)\s+",
)

_HOWTO_PREFIX = "How to "


def _strip_leadin(text: str) -> str:
    t = normalize(text).rstrip("?!. ")
    while True:
        m = _LEADIN_RE.match(t)
        if not m:
            return t
        t = t[m.end():]


def paraphrase_howto(utterance: str, n: int = 3, provider=None) -> list[ParaphraseCandidate]:
    """Deterministic "How to ..." rewrites ranked by entailment against the
    original utterance (stable sort, lexicographic tiebreak)."""
    if n < 1:
        raise DiyError("n must be >= 1")
    core = _strip_leadin(utterance)
    raw: list[str] = []
    if normalize(utterance).startswith("how to"):
        raw.append(_HOWTO_PREFIX + core)

    tagged = tag_pos(core)
    tokens = [t for t, _ in tagged]
    main_verb = next(
        (t for t, tag in tagged if tag is PosTag.VERB and t not in _AUXILIARIES), ""
    )
    if tokens and tagged[0][1] is PosTag.VERB and tagged[0][0] not in _AUXILIARIES:
        raw.append(_HOWTO_PREFIX + core)

    xwant = infer_commonsense(utterance, CommonsenseRelation.XWANT)
    remedy = ""
    if xwant:
        remedy = tokenize(xwant)[2] if len(tokenize(xwant)) > 2 else ""
        raw.append(_HOWTO_PREFIX + xwant[len("how to "):])

    verb = remedy or main_verb
    nouns = [t for t, tag in tagged if tag is PosTag.NOUN]
    adjs = [t for t, tag in tagged if tag is PosTag.ADJECTIVE]
    if verb and nouns:
        head = nouns[-1]
        if adjs:
            raw.append(f"{_HOWTO_PREFIX}{verb} a {adjs[0]} {head}")
        raw.append(f"{_HOWTO_PREFIX}{verb} the {head}")
        raw.append(f"{_HOWTO_PREFIX}{verb} a {head}")
    elif verb:
        raw.append(_HOWTO_PREFIX + verb)

    if not raw:
        raw.append(_HOWTO_PREFIX + core)

    seen: dict[str, str] = {}
    for text in raw:
        key = normalize(text)
        if key not in seen:
            seen[key] = text
    scored = [
        ParaphraseCandidate(text=text, rank_score=entailment_score(utterance, text, provider))
        for text in seen.values()
    ]
    scored.sort(key=lambda c: (-c.rank_score, c.text))
    return scored[:n]


# --- role extraction ---------------------------------------------------------

def extract_roles(sentence: str) -> PredicateArgument:
    """Shallow predicate-argument extraction over a "How to ..." sentence."""
    if not normalize(sentence).startswith("how to"):
        raise DiyError("sentence must start with 'How to'")
    tagged = tag_pos(sentence)[2:]  # drop the prefix tokens
    verb_idx = next(
        (i for i, (t, tag) in enumerate(tagged) if tag is PosTag.VERB and t not in _AUXILIARIES),
        None,
    )
    if verb_idx is None:
        raise VerbMissing(f"no main verb in {sentence!r}")
    verb = tagged[verb_idx][0]

    span: list[tuple[str, PosTag]] = []
    for tok, tag in tagged[verb_idx + 1:]:
        if tag in _NP_TAGS:
            span.append((tok, tag))
        else:
            break
    arg1 = " ".join(t for t, _ in span)
    head = next((t for t, tag in reversed(span) if tag is PosTag.NOUN), "")

    sw = stopwords()
    remainder = tuple(
        tok
        for tok, _ in tagged
        if tok not in sw and tok != verb and tok != head
    )
    return PredicateArgument(verb=verb, arg1=arg1, arg1_head_noun=head, remainder_terms=remainder)


# --- query formulation -------------------------------------------------------

def formulate_queries(utterance: str, commonsense_provider=None, entailment_provider=None) -> list[SearchQuery]:
    """Three ranked Must/Should queries from the top paraphrase candidate."""
    candidates = paraphrase_howto(utterance, 3, provider=entailment_provider)
    top = candidates[0].text

    verb, head, remainder = "", "", ()
    verb_missing = False
    try:
        roles = extract_roles(top)
        verb, head, remainder = roles.verb, roles.arg1_head_noun, roles.remainder_terms
    except VerbMissing:
        verb_missing = True
        tagged = tag_pos(top)[2:]
        nouns = [t for t, tag in tagged if tag is PosTag.NOUN]
        head = nouns[-1] if nouns else ""
        sw = stopwords()
        remainder = tuple(t for t, _ in tagged if t not in sw and t != head)

    if not head and not verb:
        # degenerate input: fall back to raw content words
        words = content_tokens(utterance) or tokenize(utterance)
        head = words[-1]

    def make(kind: QueryKind, must: list[str], should: list[str]) -> SearchQuery:
        must_t = tuple(dict.fromkeys(m for m in must if m))
        should_t = tuple(dict.fromkeys(s for s in should if s and s not in must_t))
        return SearchQuery(kind=kind, must_terms=must_t, should_terms=should_t)

    object_should = [verb, *remainder]
    if head:
        q2 = make(QueryKind.OBJECT_CENTRIC, [head], object_should)
    else:
        q2 = make(QueryKind.OBJECT_CENTRIC, [verb], list(remainder))

    if verb_missing or not verb:
        # action query unavailable: duplicate the object query, widening Should
        q1 = make(QueryKind.OBJECT_CENTRIC, list(q2.must_terms), list(q2.should_terms) + list(remainder))
    else:
        q1 = make(QueryKind.ACTION_CENTRIC, [verb], [head, *remainder])

    xintent = infer_commonsense(utterance, CommonsenseRelation.XINTENT, provider=commonsense_provider)
    intent_terms = content_tokens(xintent) if xintent else []
    if intent_terms:
        q3 = make(QueryKind.INTENT_FALLBACK, intent_terms, list(remainder))
    else:
        q3 = make(QueryKind.INTENT_FALLBACK, [head or verb], [verb, *remainder])

    return [q1, q2, q3]

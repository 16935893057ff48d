"""Per-turn language understanding: domain, intent, question, initiative.

The domain detector keeps the premise/hypothesis shape ("This text is
about X") so a remote scoring service can be swapped in; the built-in
provider scores each hypothesis by weighted lexicon overlap.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol

from functools import lru_cache

from .resources import data_path, load_tsv, load_weighted_lexicon
from .textutil import normalize, stem, tokenize


class NluError(Exception):
    pass


class Domain(str, Enum):
    DIY = "DIY"
    COOKING = "Cooking"
    FINANCE = "Finance"
    MEDICINE = "Medicine"
    LAW = "Law"
    HARM = "Harm"
    PORN_GAMBLING_DRUGS = "PornGamblingDrugs"
    LOVE_RELATIONSHIP = "LoveRelationship"
    OUT_OF_DOMAIN = "OutOfDomain"


# Domains the bot must not chat about; routed to a deflection response.
AVOID_DOMAINS = frozenset(
    {
        Domain.FINANCE,
        Domain.MEDICINE,
        Domain.LAW,
        Domain.HARM,
        Domain.PORN_GAMBLING_DRUGS,
        Domain.LOVE_RELATIONSHIP,
    }
)

HYPOTHESIS_TEMPLATE = "This text is about {topic}."

DOMAIN_TOPICS = {
    Domain.DIY: "home improvement",
    Domain.COOKING: "cooking",
    Domain.FINANCE: "finance",
    Domain.MEDICINE: "medicine",
    Domain.LAW: "law",
    Domain.HARM: "harm or violence",
    Domain.PORN_GAMBLING_DRUGS: "pornography, gambling or drugs",
    Domain.LOVE_RELATIONSHIP: "love or relationships",
    Domain.OUT_OF_DOMAIN: "something else",
}

_LEXICON_FILES = {
    Domain.DIY: "diy.txt",
    Domain.COOKING: "cooking.txt",
    Domain.FINANCE: "finance.txt",
    Domain.MEDICINE: "medicine.txt",
    Domain.LAW: "law.txt",
    Domain.HARM: "harm.txt",
    Domain.PORN_GAMBLING_DRUGS: "porn_gambling_drugs.txt",
    Domain.LOVE_RELATIONSHIP: "love_relationship.txt",
}

DEFAULT_ENTAILMENT_THRESHOLD = 0.5
_OOD_FLOOR = 0.2


@dataclass(frozen=True)
class DomainPrediction:
    scores: dict  # Domain -> entailment score in [0, 1]
    chosen: Domain
    label: str  # "entailment" | "contradiction"
    degraded: bool = False

    @property
    def avoid(self) -> bool:
        return self.chosen in AVOID_DOMAINS


class Intent(str, Enum):
    RECOMMEND = "Recommend"
    REQUEST = "Request"
    JUMP_STEPS = "JumpSteps"
    NAVIGATION = "Navigation"
    AFFIRM = "Affirm"
    DENY = "Deny"
    STOP = "Stop"
    HELP = "Help"
    QUESTION_ONLY = "QuestionOnly"
    CHITCHAT = "Chitchat"


class InitiativeLevel(str, Enum):
    HIGH = "High"
    LOW = "Low"
    RECOMMENDATION_REQUEST = "RecommendationRequest"


class ScoringProvider(Protocol):
    def score(self, utterance: str, hypotheses: list[str]) -> list[float]: ...


class HeuristicDomainProvider:
    """Scores domain hypotheses by weighted lexicon overlap.

    Lexicons are `term<TAB>weight` files, one per domain; multiword terms
    match as whole-word substrings, single words match on stems.
    """

    def __init__(self, lexicons: Optional[dict[Domain, dict[str, float]]] = None):
        if lexicons is None:
            lexicons = {
                dom: load_weighted_lexicon(data_path("lexicons", fname))
                for dom, fname in _LEXICON_FILES.items()
            }
        self._lexicons = lexicons
        self._topic_to_domain = {topic: dom for dom, topic in DOMAIN_TOPICS.items()}

    def raw_score(self, utterance: str, domain: Domain) -> float:
        lexicon = self._lexicons.get(domain)
        if not lexicon:
            return 0.0
        text = " " + " ".join(tokenize(utterance)) + " "
        stems = {stem(t) for t in tokenize(utterance)}
        total = 0.0
        for term, weight in lexicon.items():
            if " " in term:
                if f" {term} " in text:
                    total += weight
            elif stem(term) in stems:
                total += weight
        return total

    def score(self, utterance: str, hypotheses: list[str]) -> list[float]:
        raws = {}
        for hyp in hypotheses:
            topic = _topic_of(hyp)
            dom = self._topic_to_domain.get(topic)
            raws[hyp] = self.raw_score(utterance, dom) if dom else 0.0
        any_hit = any(v > 0 for v in raws.values())
        out = []
        for hyp in hypotheses:
            if _topic_of(hyp) == DOMAIN_TOPICS[Domain.OUT_OF_DOMAIN]:
                # out-of-domain wins exactly when no lexicon fires,
                # keeping the argmax invariant under weight rescaling
                out.append(0.0 if any_hit else _OOD_FLOOR)
            else:
                raw = raws[hyp]
                out.append(raw / (raw + 1.0))
        return out


def _topic_of(hypothesis: str) -> str:
    m = re.match(r"This text is about (.+)\.$", hypothesis)
    return m.group(1) if m else hypothesis


class RemoteScoringProvider:
    """JSON-over-HTTP scorer: POST {utterance, hypotheses[]} -> {scores[]}.

    Falls back to the wrapped heuristic provider on any transport error;
    the caller marks the prediction degraded.
    """

    def __init__(self, url: str, fallback: ScoringProvider, timeout: float = 2.0):
        self.url = url
        self.fallback = fallback
        self.timeout = timeout
        self.last_degraded = False

    def score(self, utterance: str, hypotheses: list[str]) -> list[float]:
        import httpx

        self.last_degraded = False
        try:
            resp = httpx.post(
                self.url,
                json={"utterance": utterance, "hypotheses": hypotheses},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            scores = resp.json()["scores"]
            if len(scores) != len(hypotheses):
                raise ValueError("score count mismatch")
            return [float(s) for s in scores]
        except Exception:
            self.last_degraded = True
            return self.fallback.score(utterance, hypotheses)


def detect_domain(
    utterance: str,
    provider: Optional[ScoringProvider] = None,
    threshold: float = DEFAULT_ENTAILMENT_THRESHOLD,
) -> DomainPrediction:
    if not utterance or not utterance.strip():
        raise NluError("empty utterance")
    if provider is None:
        provider = default_domain_provider()
    domains = list(Domain)
    hypotheses = [HYPOTHESIS_TEMPLATE.format(topic=DOMAIN_TOPICS[d]) for d in domains]
    scores = provider.score(utterance, hypotheses)
    by_domain = dict(zip(domains, scores))
    chosen = max(domains, key=lambda d: (by_domain[d], -domains.index(d)))
    # ties break by enum order (DIY before Cooking)
    best = by_domain[chosen]
    for d in domains:
        if by_domain[d] == best:
            chosen = d
            break
    label = "entailment" if by_domain[chosen] >= threshold else "contradiction"
    degraded = bool(getattr(provider, "last_degraded", False))
    return DomainPrediction(scores=by_domain, chosen=chosen, label=label, degraded=degraded)


_default_provider: Optional[HeuristicDomainProvider] = None


def default_domain_provider() -> HeuristicDomainProvider:
    global _default_provider
    if _default_provider is None:
        _default_provider = HeuristicDomainProvider()
    return _default_provider


# --- intent classification -------------------------------------------------

_STOP_PATTERNS = (
    "stop",
    "quit",
    "exit",
    "cancel",
    "goodbye",
    "good bye",
    "bye",
    "i'm done",
    "im done",
    "end the conversation",
)
NAVIGATION_COMMANDS = (
    "next",
    "next step",
    "previous",
    "previous step",
    "go back",
    "back",
    "repeat",
    "repeat that",
    "say that again",
    "show ingredients",
    "show me the ingredients",
    "what are the ingredients",
    "last step",
    "go to the last step",
    "go to last step",
    "first step",
    "continue",
    "start",
    "start the task",
    "let's start",
    "i'm done with this step",
    "done",
    "complete",
    "finish",
)
_HELP_PATTERNS = (
    "help",
    "what can you do",
    "how can you help",
    "what do you do",
    "what are you able to do",
)
_AFFIRM_WORDS = {"yes", "yeah", "yep", "sure", "correct", "right", "ok", "okay", "exactly", "affirmative"}
_DENY_WORDS = {"no", "nope", "nah", "wrong", "incorrect", "negative"}
_RECOMMEND_RE = re.compile(r"\b(recommend|recommendation|suggest|suggestion|suggestions|ideas?\b.*\?|surprise me)\b")
_REQUEST_RE = re.compile(
    r"^(how to |how do i |how can i |how does one )"
    r"|\b(i want to|i wanna|i need to|i would like to|i'd like to|i am looking for"
    r"|i'm looking for|looking for|show me|find me|help me|let's|can you find|search for)\b"
)
_JUMP_RE = re.compile(r"\b(step)\s+(\d+|one|two|three|four|five|six|seven|eight|nine|ten)\b|\bjump to\b")
_WH_RE = re.compile(r"^(what|where|when|who|why|how|which|whose)\b")


def classify_intent(utterance: str, phase: str = "Initialization") -> Intent:
    """Ordered pattern rules; local command intents are checked before the
    learned-style ones (Recommend/Request/JumpSteps)."""
    text = normalize(utterance).rstrip("?!. ")
    tokens = tokenize(text)
    if not tokens:
        return Intent.CHITCHAT
    if text in _STOP_PATTERNS:
        return Intent.STOP
    if phase == "Completion" and _JUMP_RE.search(text):
        return Intent.JUMP_STEPS
    if text in NAVIGATION_COMMANDS or _is_navigation_phrase(text):
        return Intent.NAVIGATION
    for pat in _HELP_PATTERNS:
        if pat in text:
            return Intent.HELP
    if all(t in _AFFIRM_WORDS for t in tokens) or tokens[0] in _AFFIRM_WORDS and len(tokens) <= 4:
        return Intent.AFFIRM
    if all(t in _DENY_WORDS for t in tokens) or tokens[0] in _DENY_WORDS and len(tokens) <= 4:
        return Intent.DENY
    if _RECOMMEND_RE.search(text):
        return Intent.RECOMMEND
    if _REQUEST_RE.search(text) and len(tokens) >= 3:
        return Intent.REQUEST
    # problem statements ("my roof is broken") imply a help request
    if not utterance.rstrip().endswith("?") and _problem_triggers() & set(tokens) and len(tokens) >= 3:
        return Intent.REQUEST
    if _WH_RE.match(text) or utterance.rstrip().endswith("?"):
        return Intent.QUESTION_ONLY
    return Intent.CHITCHAT


@lru_cache(maxsize=1)
def _problem_triggers() -> frozenset[str]:
    return frozenset(row[0] for row in load_tsv(data_path("commonsense.tsv")))


def _is_navigation_phrase(text: str) -> bool:
    t = text.replace("the ", "").replace("please", "").strip()
    return t in NAVIGATION_COMMANDS


# --- question detection -----------------------------------------------------

_AUX_INVERSION_RE = re.compile(
    r"^(do|does|did|can|could|will|would|should|shall|is|are|was|were|am|have|has|had|may|might)\s+\w+"
)


def detect_question(utterance: str) -> tuple[bool, float]:
    """Heuristic binary question detector.

    Confidence tracks rule specificity: interrogative template plus a
    question mark scores 1.0; a single weak cue scores 0.6. Never fires
    on the closed navigation-command list (ASR drops punctuation, so the
    rules cannot depend on '?').
    """
    text = normalize(utterance)
    bare = text.rstrip("?!. ")
    if bare in _STOP_PATTERNS or bare in NAVIGATION_COMMANDS or _is_navigation_phrase(bare):
        return False, 0.0
    has_qmark = text.endswith("?")
    wh_start = bool(_WH_RE.match(bare))
    inversion = bool(_AUX_INVERSION_RE.match(bare))
    if wh_start and has_qmark:
        return True, 1.0
    if wh_start or inversion:
        return True, 0.8
    if has_qmark:
        return True, 0.6
    return False, 0.0


# --- initiative --------------------------------------------------------------

def classify_initiative(domain: DomainPrediction | Domain, intent: Intent, utterance: str = "") -> InitiativeLevel:
    """Total, deterministic mapping from (domain, intent)."""
    chosen = domain.chosen if isinstance(domain, DomainPrediction) else domain
    if intent is Intent.RECOMMEND:
        return InitiativeLevel.RECOMMENDATION_REQUEST
    if intent is Intent.REQUEST and chosen in (Domain.DIY, Domain.COOKING):
        return InitiativeLevel.HIGH
    return InitiativeLevel.LOW

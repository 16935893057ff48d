"""Cooking entity tagging (dish-name tagger + 5-type general tagger, IOB
spans) and the ordered four-attempt recipe search plan."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional

from .diy import PosTag, tag_pos
from .resources import data_path, load_term_list
from .textutil import tokenize


class EntityKind(str, Enum):
    DISH_NAME = "DishName"
    INGREDIENT = "Ingredient"
    NEGATIVE_INGREDIENT = "NegativeIngredient"
    CUISINE = "Cuisine"
    MEAL_COURSE = "MealCourse"
    OCCASION = "Occasion"


@dataclass(frozen=True)
class EntitySpan:
    kind: EntityKind
    text: str
    start_token: int
    end_token: int  # exclusive

    @property
    def iob_tags(self) -> list[str]:
        n = self.end_token - self.start_token
        return [f"B-{self.kind.value}"] + [f"I-{self.kind.value}"] * (n - 1)


class AttemptKind(str, Enum):
    DISH_AS_DISH = "DishAsDish"
    DISH_AS_CUISINE = "DishAsCuisine"
    ALL_ENTITIES = "AllEntities"
    LAST_NOUN_AS_DISH = "LastNounAsDish"


@dataclass(frozen=True)
class RecipeConstraints:
    dish_name: Optional[str] = None
    ingredients: tuple[str, ...] = ()
    negative_ingredients: tuple[str, ...] = ()
    cuisine: Optional[str] = None
    meal_course: Optional[str] = None
    occasion: Optional[str] = None

    def is_empty(self) -> bool:
        return not (
            self.dish_name
            or self.ingredients
            or self.negative_ingredients
            or self.cuisine
            or self.meal_course
            or self.occasion
        )


@dataclass(frozen=True)
class PlanAttempt:
    kind: AttemptKind
    constraints: RecipeConstraints
    skip: bool = False


@dataclass(frozen=True)
class RecipeQueryPlan:
    """Exactly four attempts in fixed order; an attempt runs only when all
    earlier ones came back empty."""

    attempts: tuple[PlanAttempt, ...]

    def __post_init__(self):
        expected = [
            AttemptKind.DISH_AS_DISH,
            AttemptKind.DISH_AS_CUISINE,
            AttemptKind.ALL_ENTITIES,
            AttemptKind.LAST_NOUN_AS_DISH,
        ]
        if [a.kind for a in self.attempts] != expected:
            raise ValueError("plan attempts out of order")


_GAZETTEER_FILES = {
    EntityKind.INGREDIENT: "ingredients.txt",
    EntityKind.CUISINE: "cuisines.txt",
    EntityKind.MEAL_COURSE: "courses.txt",
    EntityKind.OCCASION: "occasions.txt",
}

NEGATION_CUES = ("without", "no", "minus", "allergic", "except")
NEGATION_WINDOW = 4

_MAX_NGRAM = 4


@lru_cache(maxsize=1)
def _dish_gazetteer() -> frozenset[tuple[str, ...]]:
    terms = load_term_list(data_path("gazetteers", "dishes.txt"))
    return frozenset(tuple(tokenize(t)) for t in terms)


@lru_cache(maxsize=1)
def _general_gazetteers() -> dict[EntityKind, frozenset[tuple[str, ...]]]:
    out = {}
    for kind, fname in _GAZETTEER_FILES.items():
        terms = load_term_list(data_path("gazetteers", fname))
        out[kind] = frozenset(tuple(tokenize(t)) for t in terms)
    return out


def _longest_matches(tokens: list[str], gazetteer) -> list[tuple[int, int]]:
    """Non-overlapping longest-match-then-leftmost spans over the gazetteer."""
    spans = []
    i = 0
    while i < len(tokens):
        matched = 0
        for n in range(min(_MAX_NGRAM, len(tokens) - i), 0, -1):
            if tuple(tokens[i : i + n]) in gazetteer:
                matched = n
                break
        if matched:
            spans.append((i, i + matched))
            i += matched
        else:
            i += 1
    return spans


def tag_dish_name(utterance: str) -> list[EntitySpan]:
    """Dish-name spans: gazetteer longest match, plus a `make/cook/bake <NP>`
    capture for names outside the gazetteer."""
    tokens = tokenize(utterance)
    spans = [
        EntitySpan(EntityKind.DISH_NAME, " ".join(tokens[s:e]), s, e)
        for s, e in _longest_matches(tokens, _dish_gazetteer())
    ]
    if not spans:
        spans.extend(_capture_after_cook_verb(tokens))
    return spans


def _capture_after_cook_verb(tokens: list[str]) -> list[EntitySpan]:
    tagged = tag_pos(" ".join(tokens))
    for i, tok in enumerate(tokens):
        if tok in ("make", "cook", "bake", "prepare"):
            j = i + 1
            start = None
            while j < len(tokens):
                tag = tagged[j][1]
                if tag is PosTag.NOUN or tag is PosTag.ADJECTIVE:
                    if start is None:
                        start = j
                    j += 1
                elif tag is PosTag.OTHER and start is None:
                    j += 1  # skip determiners before the phrase
                else:
                    break
            if start is not None:
                # keep only from the first noun/adjective through the last noun
                end = j
                while end > start and tagged[end - 1][1] is not PosTag.NOUN:
                    end -= 1
                if end > start:
                    return [EntitySpan(EntityKind.DISH_NAME, " ".join(tokens[start:end]), start, end)]
    return []


def tag_cooking_entities(utterance: str) -> list[EntitySpan]:
    """Five-type general tagger; ingredients inside a short window after a
    negation cue become NegativeIngredient."""
    tokens = tokenize(utterance)
    if not tokens:
        return []
    spans: list[EntitySpan] = []
    taken: set[int] = set()
    for kind, gaz in _general_gazetteers().items():
        for s, e in _longest_matches(tokens, gaz):
            if any(p in taken for p in range(s, e)):
                continue  # per-tagger spans must not overlap
            spans.append(EntitySpan(kind, " ".join(tokens[s:e]), s, e))
            taken.update(range(s, e))
    # each cue negates only the nearest ingredient inside its window
    ingredient_starts = {
        sp.start_token: i for i, sp in enumerate(spans) if sp.kind is EntityKind.INGREDIENT
    }
    for i, tok in enumerate(tokens):
        if tok not in NEGATION_CUES:
            continue
        for j in range(i + 1, min(i + 1 + NEGATION_WINDOW, len(tokens))):
            hit = ingredient_starts.get(j)
            if hit is not None:
                sp = spans[hit]
                spans[hit] = EntitySpan(
                    EntityKind.NEGATIVE_INGREDIENT, sp.text, sp.start_token, sp.end_token
                )
                break
    spans.sort(key=lambda sp: sp.start_token)
    return spans


def build_recipe_search_plan(
    dish_spans: list[EntitySpan],
    entity_spans: list[EntitySpan],
    utterance: str,
) -> RecipeQueryPlan:
    dish = dish_spans[0].text if dish_spans else None
    negatives = tuple(
        sp.text for sp in entity_spans if sp.kind is EntityKind.NEGATIVE_INGREDIENT
    )

    # explicit exclusions ("without X") apply even when searching by dish name
    a1 = PlanAttempt(
        AttemptKind.DISH_AS_DISH,
        RecipeConstraints(dish_name=dish, negative_ingredients=negatives),
        skip=dish is None,
    )
    a2 = PlanAttempt(
        AttemptKind.DISH_AS_CUISINE,
        RecipeConstraints(cuisine=dish, negative_ingredients=negatives),
        skip=dish is None,
    )

    by_kind: dict[EntityKind, list[str]] = {}
    for sp in entity_spans:
        by_kind.setdefault(sp.kind, []).append(sp.text)
    all_entities = RecipeConstraints(
        ingredients=tuple(by_kind.get(EntityKind.INGREDIENT, ())),
        negative_ingredients=tuple(by_kind.get(EntityKind.NEGATIVE_INGREDIENT, ())),
        cuisine=(by_kind.get(EntityKind.CUISINE) or [None])[0],
        meal_course=(by_kind.get(EntityKind.MEAL_COURSE) or [None])[0],
        occasion=(by_kind.get(EntityKind.OCCASION) or [None])[0],
    )
    a3 = PlanAttempt(AttemptKind.ALL_ENTITIES, all_entities, skip=all_entities.is_empty())

    nouns = [tok for tok, tag in tag_pos(utterance) if tag is PosTag.NOUN]
    last_noun = nouns[-1] if nouns else None
    a4 = PlanAttempt(
        AttemptKind.LAST_NOUN_AS_DISH,
        RecipeConstraints(dish_name=last_noun),
        skip=last_noun is None,
    )
    return RecipeQueryPlan(attempts=(a1, a2, a3, a4))

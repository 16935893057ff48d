from hypothesis import given
from hypothesis import strategies as st

from tasktalk.recipes import (
    AttemptKind,
    EntityKind,
    RecipeConstraints,
    build_recipe_search_plan,
    tag_cooking_entities,
    tag_dish_name,
)

COOKING_UTTERANCES = st.sampled_from(
    [
        "I want to make a strawberry cupcake without chocolate",
        "make lemon pie",
        "an italian dinner with chicken",
        "bake a cake but no eggs",
        "something for breakfast",
        "show me fried rice recipes",
        "a dessert for christmas",
        "cook something with tomatoes and garlic",
        "I'd like sushi tonight",
        "just anything at all",
    ]
)


def test_dish_tagger_paper_examples():
    assert [s.text for s in tag_dish_name("I want to make a strawberry cupcake without chocolate")] == [
        "strawberry cupcake"
    ]
    assert [s.text for s in tag_dish_name("make lemon pie")] == ["lemon pie"]


def test_dish_tagger_prefers_longest_match():
    spans = tag_dish_name("I want a strawberry cupcake")
    assert spans[0].text == "strawberry cupcake"


def test_entity_tagger_negative_ingredient():
    got = {(s.text, s.kind) for s in tag_cooking_entities("strawberry cupcake without chocolate")}
    assert ("strawberry", EntityKind.INGREDIENT) in got
    assert ("chocolate", EntityKind.NEGATIVE_INGREDIENT) in got


def test_negation_window_is_local():
    spans = tag_cooking_entities("no onions and extra garlic please")
    kinds = {s.text: s.kind for s in spans}
    assert kinds["onions"] is EntityKind.NEGATIVE_INGREDIENT
    assert kinds["garlic"] is EntityKind.INGREDIENT


def test_negation_cue_out_of_window_does_not_fire():
    spans = tag_cooking_entities("no need to worry, just some simple eggs")
    kinds = {s.text: s.kind for s in spans}
    assert kinds.get("eggs") is EntityKind.INGREDIENT


@given(COOKING_UTTERANCES)
def test_entity_spans_form_valid_iob(utterance):
    for span in tag_cooking_entities(utterance) + tag_dish_name(utterance):
        tags = span.iob_tags
        assert tags[0].startswith("B-")
        assert all(t.startswith("I-") for t in tags[1:])
        assert span.end_token - span.start_token == len(tags)


@given(COOKING_UTTERANCES)
def test_per_tagger_spans_do_not_overlap(utterance):
    spans = tag_cooking_entities(utterance)
    seen = set()
    for span in spans:
        positions = set(range(span.start_token, span.end_token))
        assert not positions & seen
        seen |= positions


def test_plan_order_is_fixed():
    plan = build_recipe_search_plan(
        tag_dish_name("make lemon pie"),
        tag_cooking_entities("make lemon pie"),
        "make lemon pie",
    )
    assert [a.kind for a in plan.attempts] == [
        AttemptKind.DISH_AS_DISH,
        AttemptKind.DISH_AS_CUISINE,
        AttemptKind.ALL_ENTITIES,
        AttemptKind.LAST_NOUN_AS_DISH,
    ]
    assert plan.attempts[0].constraints.dish_name == "lemon pie"
    assert plan.attempts[1].constraints.cuisine == "lemon pie"


def test_plan_paper_example_all_entities():
    utterance = "I want to make a strawberry cupcake without chocolate"
    plan = build_recipe_search_plan(tag_dish_name(utterance), tag_cooking_entities(utterance), utterance)
    a3 = plan.attempts[2].constraints
    assert a3.ingredients == ("strawberry",)
    assert a3.negative_ingredients == ("chocolate",)


def test_plan_skips_attempts_without_inputs():
    plan = build_recipe_search_plan([], [], "just anything at all")
    assert plan.attempts[0].skip and plan.attempts[1].skip and plan.attempts[2].skip


def test_dish_attempts_respect_exclusions():
    utterance = "I want to make a strawberry cupcake without chocolate"
    plan = build_recipe_search_plan(tag_dish_name(utterance), tag_cooking_entities(utterance), utterance)
    assert plan.attempts[0].constraints.negative_ingredients == ("chocolate",)


def test_constraints_is_empty():
    assert RecipeConstraints().is_empty()
    assert not RecipeConstraints(dish_name="pie").is_empty()

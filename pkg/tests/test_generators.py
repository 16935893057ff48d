import pytest
from hypothesis import given
from hypothesis import strategies as st

from tasktalk.generators import (
    DEFAULT_TIERS,
    SPEECH_BUDGET,
    FunFact,
    FunFactTable,
    GeneratorError,
    PersonaConfig,
    conversational_prompt_for_task,
    elicitation,
    fallback_response,
    fun_fact_lookup,
    launch_greeting,
    make_candidate,
    present_options,
    recommend,
    render_ingredients,
    render_step,
    safety_deflection,
    social_chat,
)
from tasktalk.retrieval import RankedResult, load_recipe_corpus, load_task_corpus
from tasktalk.state import ConversationState, TaskSession

TASKS = load_task_corpus()
RECIPES = load_recipe_corpus()
TITLES = {d.id: d.title for d in TASKS} | {d.id: d.name for d in RECIPES}


@given(st.text(min_size=1, max_size=2000).filter(lambda s: s.strip()))
def test_speech_budget_enforced(text):
    candidate = make_candidate(text, "fallback")
    assert 0 < len(candidate.text) <= SPEECH_BUDGET


def test_tier_table_orders_safety_first_fallback_last():
    assert DEFAULT_TIERS["safety-deflection"] == 0
    assert DEFAULT_TIERS["fallback"] == max(DEFAULT_TIERS.values())
    assert DEFAULT_TIERS["task-content"] < DEFAULT_TIERS["qa"] < DEFAULT_TIERS["recommender"]


def test_launch_greeting_mentions_both_domains_and_is_first_turn_only():
    candidate = launch_greeting("abc", 0)
    assert "home improvement" in candidate.text and "cooking" in candidate.text
    with pytest.raises(GeneratorError):
        launch_greeting("abc", 1)


def test_launch_suggestion_is_deterministic_per_session():
    assert launch_greeting("abc", 0).text == launch_greeting("abc", 0).text
    texts = {launch_greeting(f"s{i}", 0).text for i in range(12)}
    assert len(texts) > 1


def test_recommender_excludes_already_recommended():
    state = ConversationState(session_id="s")
    _, first = recommend("Cooking", state, TASKS, RECIPES)
    state = ConversationState(session_id="s", recommended_ids=tuple(i for i, _ in first))
    _, second = recommend("Cooking", state, TASKS, RECIPES)
    assert not set(i for i, _ in first) & set(i for i, _ in second)


def test_recommender_orders_by_popularity():
    state = ConversationState(session_id="s")
    _, picks = recommend("DIY", state, TASKS, RECIPES)
    pops = [next(d.popularity for d in TASKS if d.id == i) for i, _ in picks]
    assert pops == sorted(pops, reverse=True)


def test_conversational_prompt_contains_name_and_stays_short():
    for name in ("Chocolate Cake", "How to Fix a Bike"):
        text = conversational_prompt_for_task(name)
        assert name in text
        assert len(text) <= 160


def test_social_chat_budget_and_redirect():
    state = ConversationState(session_id="s")
    candidate = social_chat("hi there", state)
    assert candidate is not None
    assert candidate.text.rstrip().endswith("?")
    spent = ConversationState(session_id="s", social_chat_turns_used=2)
    assert social_chat("hi there", spent) is None


def test_social_chat_persona_answer():
    state = ConversationState(session_id="s")
    persona = PersonaConfig()
    candidate = social_chat("tell me about yourself", state, persona=persona)
    assert persona.persona_sentence in candidate.text


def test_present_options_caps_at_three():
    results = [RankedResult(d.id, 1.0, "") for d in TASKS[:5]]
    candidate, shown = present_options(results, TITLES)
    assert len(shown) == 3
    assert "1." in candidate.text and "3." in candidate.text and "4." not in candidate.text


def test_present_options_single_result_confirms():
    candidate, shown = present_options([RankedResult(TASKS[0].id, 1.0, "")], TITLES)
    assert len(shown) == 1
    assert "start" in candidate.text.casefold()


def test_present_options_empty_offers_alternatives():
    candidate, shown = present_options([], TITLES)
    assert shown == []
    assert candidate.responder_id == "show-alternative-options"


def test_fun_fact_threshold():
    facts = (
        FunFact(topic_terms=("chocolate",), text="Fun fact: chocolate melts at body temperature."),
        FunFact(topic_terms=("roof",), text="Fun fact: slate roofs last a century."),
    )
    hit = fun_fact_lookup("melt the chocolate in a bowl", facts=facts)
    assert hit is not None and "chocolate" in hit.text
    assert fun_fact_lookup("qwerty zxcvb", facts=facts) is None


def test_fun_fact_table_cosine_bounds():
    table = FunFactTable(
        (FunFact(topic_terms=("egg",), text="Fun fact: eggs sink when fresh."),)
    )
    _, cos = table.best("crack the eggs")
    assert 0.0 <= cos <= 1.0


def test_render_step_format_and_navigation_hint():
    doc = TASKS[0]
    first = render_step(TaskSession(doc.id, "Task", 0, started=True), doc, include_fun_fact=False)
    assert first.text.startswith(f"Step 1 of {len(doc.steps)}:")
    third = render_step(TaskSession(doc.id, "Task", 2, started=True), doc, include_fun_fact=False)
    if len(doc.steps) > 3:
        assert '"next"' in third.text


def test_render_step_requires_started_session():
    with pytest.raises(GeneratorError):
        render_step(TaskSession(TASKS[0].id, "Task", 0, started=False), TASKS[0])


def test_render_ingredients_lists_quantities():
    recipe = next(d for d in RECIPES if d.id == "r-chocolate-cake")
    candidate = render_ingredients(recipe)
    assert candidate.text.startswith("You will need:")
    assert "eggs" in candidate.text


def test_render_ingredients_chunks_long_lists():
    big = max(RECIPES, key=lambda d: len(d.ingredients))
    if len(big.ingredients) > 8:
        assert "And also:" in render_ingredients(big).text


def test_static_generators_have_expected_tiers():
    assert safety_deflection().tier == 0
    assert fallback_response().tier == DEFAULT_TIERS["fallback"]
    assert elicitation().tier == DEFAULT_TIERS["elicitation"]

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tasktalk.generators import make_candidate
from tasktalk.manager import (
    ManagerError,
    NavAction,
    NavigationCommand,
    apply_navigation,
    handle_change_task,
    parse_navigation,
    rank_responses,
    route,
)
from tasktalk.retrieval import load_recipe_corpus, load_task_corpus
from tasktalk.state import AnnotationSet, ConversationState, DialoguePhase, TaskSession

TASKS = load_task_corpus()
RECIPES = load_recipe_corpus()


def annotate(**kwargs):
    return AnnotationSet(**kwargs)


def state_at(phase, **kwargs):
    return ConversationState(session_id="s", phase=phase, **kwargs)


def test_route_high_initiative_goes_to_retrieval():
    decision = route(
        state_at(DialoguePhase.INITIALIZATION),
        annotate(domain="Cooking", intent="Request", initiative="High"),
    )
    assert "retrieval" in decision.selected_generators
    assert decision.phase_after is DialoguePhase.SELECTION


def test_route_first_turn_low_initiative_launches():
    decision = route(state_at(DialoguePhase.INITIALIZATION), annotate(intent="Chitchat"))
    assert "launch" in decision.selected_generators


def test_route_low_initiative_social_chat_after_launch():
    decision = route(
        state_at(DialoguePhase.INITIALIZATION, launch_done=True),
        annotate(intent="Chitchat", initiative="Low"),
    )
    assert "social-chat" in decision.selected_generators
    spent = state_at(DialoguePhase.INITIALIZATION, launch_done=True, social_chat_turns_used=2)
    decision = route(spent, annotate(intent="Chitchat", initiative="Low"))
    assert "social-chat" not in decision.selected_generators
    assert "elicitation" in decision.selected_generators


def test_route_avoid_domain_short_circuits():
    decision = route(
        state_at(DialoguePhase.COMPLETION),
        annotate(domain="Finance", avoid=True, intent="Request", initiative="Low"),
    )
    assert decision.selected_generators == ("safety-deflection",)


def test_route_recommendation_request():
    decision = route(
        state_at(DialoguePhase.INITIALIZATION),
        annotate(intent="Recommend", initiative="RecommendationRequest"),
    )
    assert "recommender" in decision.selected_generators


def test_route_completion_request_deflects():
    decision = route(
        state_at(DialoguePhase.COMPLETION),
        annotate(domain="Cooking", intent="Request", initiative="High"),
    )
    assert "changing-task" in decision.selected_generators
    assert "retrieval" not in decision.selected_generators


def test_route_questions_add_qa():
    decision = route(
        state_at(DialoguePhase.COMPLETION),
        annotate(intent="QuestionOnly", is_question=True),
    )
    assert "qa" in decision.selected_generators


def test_route_always_includes_fallback():
    for phase in DialoguePhase:
        decision = route(state_at(phase), annotate())
        assert "fallback" in decision.selected_generators or decision.selected_generators == ("safety-deflection",)


def test_rank_prefers_lower_tier_then_confidence_then_text():
    low_tier = make_candidate("task words", "task-content", confidence=0.2)
    high_tier = make_candidate("fallback words", "fallback", confidence=1.0)
    assert rank_responses([high_tier, low_tier]) is low_tier
    confident = make_candidate("a", "qa", confidence=0.9)
    hesitant = make_candidate("b", "qa", confidence=0.1)
    assert rank_responses([hesitant, confident]) is confident
    tie_a = make_candidate("alpha", "qa", confidence=0.5)
    tie_b = make_candidate("beta", "qa", confidence=0.5)
    assert rank_responses([tie_b, tie_a]) is tie_a


def test_rank_rejects_empty():
    with pytest.raises(ManagerError):
        rank_responses([])


@given(st.permutations([
    ("safety-deflection", 1.0, "s"),
    ("task-content", 0.9, "t"),
    ("qa", 0.8, "q"),
    ("fallback", 0.1, "f"),
]))
def test_rank_is_order_independent(perm):
    candidates = [make_candidate(text, rid, confidence=c) for rid, c, text in perm]
    assert rank_responses(candidates).responder_id == "safety-deflection"


def test_parse_navigation_forms():
    assert parse_navigation("next").action is NavAction.NEXT
    assert parse_navigation("go back").action is NavAction.PREVIOUS
    assert parse_navigation("repeat that").action is NavAction.REPEAT
    assert parse_navigation("show me the ingredients").action is NavAction.SHOW_INGREDIENTS
    cmd = parse_navigation("jump to step 3")
    assert cmd.action is NavAction.JUMP_TO and cmd.step == 3
    assert parse_navigation("go to the last step").action is NavAction.LAST_STEP
    assert parse_navigation("stop").action is NavAction.STOP
    assert parse_navigation("tell me a story") is None


def _session(doc, index=0, kind="Task"):
    return TaskSession(doc_id=doc.id, doc_kind=kind, step_index=index, started=True)


def test_next_advances_and_completes_at_end():
    doc = TASKS[0]
    session, content = apply_navigation(_session(doc, 0), NavigationCommand(NavAction.NEXT), doc)
    assert (session.step_index, content) == (1, "step")
    last = _session(doc, len(doc.steps) - 1)
    session, content = apply_navigation(last, NavigationCommand(NavAction.NEXT), doc)
    assert content == "completed"
    assert session.completed


def test_previous_at_first_step_apologizes():
    doc = TASKS[0]
    session, content = apply_navigation(_session(doc, 0), NavigationCommand(NavAction.PREVIOUS), doc)
    assert content == "already-at-first-step"
    assert session.step_index == 0


def test_jump_out_of_bounds_rejected():
    doc = TASKS[0]
    session, content = apply_navigation(
        _session(doc, 1), NavigationCommand(NavAction.JUMP_TO, step=99), doc
    )
    assert content == "step-out-of-range"
    assert session.step_index == 1


def test_show_ingredients_only_for_recipes():
    doc = TASKS[0]
    _, content = apply_navigation(_session(doc), NavigationCommand(NavAction.SHOW_INGREDIENTS), doc)
    assert content == "no-ingredients-for-diy"
    recipe = RECIPES[0]
    _, content = apply_navigation(
        _session(recipe, kind="Recipe"), NavigationCommand(NavAction.SHOW_INGREDIENTS), recipe
    )
    assert content == "ingredients"


def test_navigation_requires_started_session():
    doc = TASKS[0]
    idle = TaskSession(doc_id=doc.id, doc_kind="Task", started=False)
    with pytest.raises(ManagerError):
        apply_navigation(idle, NavigationCommand(NavAction.NEXT), doc)


def test_change_task_needs_active_session():
    active = state_at(
        DialoguePhase.COMPLETION,
        task_session=TaskSession(doc_id=TASKS[0].id, doc_kind="Task", started=True),
    )
    assert handle_change_task(active).responder_id == "changing-task"
    with pytest.raises(ManagerError):
        handle_change_task(state_at(DialoguePhase.INITIALIZATION))

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tasktalk.state import (
    PHASE_TRANSITIONS,
    AnnotationSet,
    ConversationState,
    DialoguePhase,
    FileStateStore,
    InMemoryStateStore,
    StateDecodeError,
    StateError,
    TaskSession,
    Turn,
    append_turn,
    decode_state,
    encode_state,
)

annotations_st = st.builds(
    AnnotationSet,
    domain=st.sampled_from(["DIY", "Cooking", "OutOfDomain", "Finance"]),
    domain_score=st.floats(0, 1, allow_nan=False),
    avoid=st.booleans(),
    intent=st.sampled_from(["Request", "Recommend", "Chitchat", "Stop"]),
    initiative=st.sampled_from(["High", "Low", "RecommendationRequest"]),
    is_question=st.booleans(),
    question_confidence=st.floats(0, 1, allow_nan=False),
)

text_st = st.text(max_size=60).filter(lambda s: "\x00" not in s)


def turns_st():
    return st.lists(
        st.tuples(text_st, text_st, annotations_st, st.integers(0, 2**31 - 1)),
        max_size=6,
    ).map(
        lambda rows: tuple(
            Turn(index=i, user_text=u, bot_text=b, annotations=a, responder_id="qa", timestamp=ts)
            for i, (u, b, a, ts) in enumerate(rows)
        )
    )


states_st = st.builds(
    ConversationState,
    session_id=st.text(min_size=1, max_size=20).filter(lambda s: "\x00" not in s),
    turns=turns_st(),
    phase=st.sampled_from(list(DialoguePhase)),
    social_chat_turns_used=st.integers(0, 2),
)


@given(states_st)
def test_encode_decode_round_trip(state):
    assert decode_state(encode_state(state)) == state


def test_decode_rejects_corrupted_payload():
    state = ConversationState(session_id="s")
    payload = encode_state(state)
    broken = json.loads(payload)
    del broken["phase"]
    with pytest.raises(StateDecodeError):
        decode_state(json.dumps(broken))
    with pytest.raises(StateDecodeError):
        decode_state("not json at all")


def test_append_turn_is_pure_and_indexed():
    state = ConversationState(session_id="s")
    turn = Turn(index=0, user_text="hi", bot_text="hello", annotations=AnnotationSet(), responder_id="launch")
    new = append_turn(state, turn)
    assert len(state.turns) == 0
    assert len(new.turns) == 1
    with pytest.raises(StateError):
        append_turn(state, Turn(index=5, user_text="x", bot_text="y", annotations=AnnotationSet(), responder_id="qa"))


def test_phase_transition_table_shape():
    assert PHASE_TRANSITIONS[DialoguePhase.INITIALIZATION] >= {
        DialoguePhase.SELECTION,
        DialoguePhase.ENDED,
    }
    assert DialoguePhase.SELECTION in PHASE_TRANSITIONS[DialoguePhase.SELECTION]
    assert PHASE_TRANSITIONS[DialoguePhase.ENDED] == {DialoguePhase.ENDED}
    for phase, targets in PHASE_TRANSITIONS.items():
        assert DialoguePhase.ENDED in targets


def test_validate_flags_active_task_outside_completion():
    session = TaskSession(doc_id="t1", doc_kind="Task", started=True)
    state = ConversationState(session_id="s", phase=DialoguePhase.SELECTION, task_session=session)
    with pytest.raises(StateError):
        state.validate()
    done = ConversationState(
        session_id="s",
        phase=DialoguePhase.SELECTION,
        task_session=TaskSession(doc_id="t1", doc_kind="Task", started=True, completed=True),
    )
    done.validate()


def test_in_memory_store_round_trip():
    store = InMemoryStateStore()
    assert store.get_state("missing") is None
    state = ConversationState(session_id="abc")
    store.put_state("abc", state)
    assert store.get_state("abc") == state


def test_file_store_round_trip_and_corruption(tmp_path):
    store = FileStateStore(str(tmp_path))
    state = ConversationState(session_id="abc", phase=DialoguePhase.SELECTION)
    store.put_state("abc", state)
    files = list(tmp_path.glob("*.state"))
    assert len(files) == 1
    assert store.get_state("abc") == state
    files[0].write_text("{broken", encoding="utf-8")
    with pytest.raises(StateDecodeError):
        store.get_state("abc")

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tasktalk.diy import (
    CommonsenseRelation,
    DiyError,
    PosTag,
    QueryKind,
    SearchQuery,
    VerbMissing,
    default_commonsense_provider,
    default_entailment_provider,
    entailment_score,
    extract_roles,
    formulate_queries,
    paraphrase_howto,
    tag_pos,
)

PROBLEM_UTTERANCES = st.sampled_from(
    [
        "My roof is broken.",
        "my sink is clogged",
        "the kitchen wall is dirty",
        "how tall can nice my bedroom",
        "I want to paint the fence",
        "my lawn looks dead",
        "the faucet is leaky",
        "how to fix a squeaky door",
        "my garden is overgrown",
        "the carpet is stained",
    ]
)


def test_pos_tags_cover_examples():
    tags = dict(tag_pos("how to fix a broken roof"))
    assert tags["fix"] is PosTag.VERB
    assert tags["broken"] is PosTag.ADJECTIVE
    assert tags["roof"] is PosTag.NOUN
    assert tags["a"] is PosTag.OTHER


def test_noun_verb_ambiguity_resolved_by_position():
    assert dict(tag_pos("how to garden"))["garden"] is PosTag.VERB
    assert dict(tag_pos("my vegetable garden is overgrown"))["garden"] is PosTag.NOUN
    assert dict(tag_pos("cook the rice"))["cook"] is PosTag.VERB


def test_commonsense_paper_examples():
    provider = default_commonsense_provider()
    want = provider.infer("My roof is broken.", CommonsenseRelation.XWANT)
    assert "fix" in want and "roof" in want
    assert provider.infer("how tall can nice my bedroom", CommonsenseRelation.XINTENT) == "to have a nice room"
    assert provider.infer("how tall can nice my bedroom", CommonsenseRelation.XWANT).startswith("how to decorate")


def test_paraphrase_includes_expected_candidate():
    texts = [c.text for c in paraphrase_howto("My roof is broken.")]
    assert "How to fix a broken roof" in texts


def test_paraphrase_identity_when_already_howto():
    texts = [c.text for c in paraphrase_howto("How to fix a roof")]
    assert texts[0] == "How to fix a roof"


# first call pays for lexicon loading, so no per-example deadline
@settings(deadline=None)
@given(PROBLEM_UTTERANCES, st.integers(1, 5))
def test_paraphrase_prefix_law(utterance, n):
    candidates = paraphrase_howto(utterance, n=n)
    assert 1 <= len(candidates) <= n
    for c in candidates:
        assert c.text.startswith("How to")


@given(PROBLEM_UTTERANCES)
def test_paraphrase_default_count_is_three(utterance):
    assert len(paraphrase_howto(utterance)) <= 3
    assert paraphrase_howto(utterance) == paraphrase_howto(utterance)


def test_extract_roles_skips_adjectives_for_head():
    roles = extract_roles("How to fix a broken roof")
    assert roles.verb == "fix"
    assert roles.arg1 == "a broken roof"
    assert roles.arg1_head_noun == "roof"


def test_extract_roles_requires_a_verb():
    with pytest.raises(VerbMissing):
        extract_roles("How to a broken roof")
    with pytest.raises(DiyError):
        extract_roles("a broken roof")


def test_entailment_prefers_shared_objects():
    left = entailment_score("My roof is broken", "How to fix a roof")
    right = entailment_score("My roof is broken", "How to fix a car")
    assert left > right


def test_entailment_score_bounds():
    provider = default_entailment_provider()
    for hyp in ("How to fix a roof", "How to decorate a room", "completely unrelated words"):
        score = provider.score("My roof is broken", hyp)
        assert 0.0 <= score <= 1.0


def test_query_formulation_paper_examples():
    q1, q2, q3 = formulate_queries("My roof is broken")
    assert q1.kind is QueryKind.ACTION_CENTRIC and q1.must_terms == ("fix",)
    assert q2.kind is QueryKind.OBJECT_CENTRIC and q2.must_terms == ("roof",)
    assert q3.kind is QueryKind.INTENT_FALLBACK
    q3_bedroom = formulate_queries("how tall can nice my bedroom")[2]
    assert "room" in q3_bedroom.must_terms


def test_query_invariants_must_nonempty_and_disjoint():
    for utterance in ("My roof is broken", "how to clean the grout", "I want to paint the fence"):
        for q in formulate_queries(utterance):
            assert q.must_terms
            assert not set(q.must_terms) & set(q.should_terms)


def test_search_query_rejects_bad_shapes():
    with pytest.raises(DiyError):
        SearchQuery(QueryKind.ACTION_CENTRIC, (), ("roof",))
    with pytest.raises(DiyError):
        SearchQuery(QueryKind.ACTION_CENTRIC, ("fix",), ("fix", "roof"))


def test_verb_missing_widens_object_query():
    # no verb anywhere, even after paraphrasing: q1 falls back to an
    # object-centric duplicate instead of an action query
    q1, q2, _ = formulate_queries("the wooden table")
    assert q1.kind is QueryKind.OBJECT_CENTRIC
    assert q1.must_terms == q2.must_terms

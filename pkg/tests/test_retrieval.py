import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tasktalk.diy import QueryKind, SearchQuery
from tasktalk.recipes import RecipeConstraints
from tasktalk.retrieval import (
    CorpusError,
    RecipeIndex,
    TaskIndex,
    levenshtein,
    load_recipe_corpus,
    load_task_corpus,
    match_selection,
    parse_ordinal,
    retrieve_diy,
    search_recipes,
    search_tasks,
)


@pytest.fixture(scope="module")
def task_index():
    return TaskIndex(load_task_corpus())


@pytest.fixture(scope="module")
def recipe_index():
    return RecipeIndex(load_recipe_corpus())


def test_bundled_corpora_load(task_index, recipe_index):
    assert len(task_index.docs) == 20
    assert len(recipe_index.docs) >= 30


def test_corpus_loader_rejects_duplicates(tmp_path):
    path = tmp_path / "tasks.jsonl"
    row = {"id": "t1", "title": "How to X", "steps": ["do it"]}
    path.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(CorpusError):
        load_task_corpus(str(path))


def test_corpus_loader_reports_line_numbers(tmp_path):
    path = tmp_path / "tasks.jsonl"
    path.write_text('{"id": "t1"}\n', encoding="utf-8")
    with pytest.raises(CorpusError) as exc:
        load_task_corpus(str(path))
    assert ":1" in str(exc.value)


def test_must_filter_is_hard(task_index):
    q = SearchQuery(QueryKind.OBJECT_CENTRIC, ("roof",), ())
    results = search_tasks(q, task_index)
    assert results
    for r in results:
        doc = task_index.docs[r.doc_id]
        text = (doc.title + " " + " ".join(doc.steps)).casefold()
        assert "roof" in text


def test_should_terms_break_ties(task_index):
    with_should = search_tasks(SearchQuery(QueryKind.ACTION_CENTRIC, ("fix",), ("door",)), task_index)
    titles = [task_index.docs[r.doc_id].title for r in with_should]
    assert "door" in titles[0].casefold()


def test_retrieve_diy_ranks_roof_doc_first(task_index):
    results = retrieve_diy("My roof is broken", task_index)
    assert results
    assert task_index.docs[results[0].doc_id].title == "How to Repair a Broken Roof"
    assert len(results) <= 6


def test_recipe_search_dish_substring(recipe_index):
    results = search_recipes(RecipeConstraints(dish_name="lemon pie"), recipe_index)
    names = [recipe_index.docs[r.doc_id].name for r in results]
    assert "Classic Lemon Pie" in names


def test_recipe_search_unknown_cuisine_is_empty(recipe_index):
    assert search_recipes(RecipeConstraints(cuisine="strawberry cupcake"), recipe_index) == []


def test_recipe_search_negative_ingredients_excluded(recipe_index):
    results = search_recipes(
        RecipeConstraints(ingredients=("strawberry",), negative_ingredients=("chocolate",)),
        recipe_index,
    )
    for r in results:
        doc = recipe_index.docs[r.doc_id]
        names = " ".join(i.name for i in doc.ingredients).casefold()
        assert "chocolate" not in names


def test_levenshtein_known_values():
    assert levenshtein("", "") == 0
    assert levenshtein("abc", "") == 3
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("Lemon Pie", "lemon pie") == 0


@given(st.text(max_size=25), st.text(max_size=25))
def test_levenshtein_symmetry_and_bounds(a, b):
    d = levenshtein(a, b)
    assert d == levenshtein(b, a)
    assert d <= max(len(a.casefold()), len(b.casefold()))
    if a.casefold() == b.casefold():
        assert d == 0


def test_parse_ordinal_forms():
    assert parse_ordinal("the second one", 3) == 2
    assert parse_ordinal("number 3", 3) == 3
    assert parse_ordinal("1st", 3) == 1
    assert parse_ordinal("two", 3) == 2
    assert parse_ordinal("the fourth one", 3) is None
    assert parse_ordinal("lemon pie", 3) is None


def test_match_selection_examples():
    assert match_selection("lemon pie", ["banana bread", "lemon pie"]) == (1, 0.0, False)
    idx, dist, confirm = match_selection("lemon pine", ["banana bread", "lemon pie"])
    assert (idx, confirm) == (1, False)
    assert dist == pytest.approx(0.1)


def test_match_selection_high_distance_needs_confirmation():
    idx, dist, confirm = match_selection("zzzzzz", ["banana bread", "lemon pie"])
    assert confirm
    assert dist > 0.3


def test_match_selection_ordinal_bypasses_distance():
    assert match_selection("the first one", ["banana bread", "lemon pie"]) == (0, 0.0, False)

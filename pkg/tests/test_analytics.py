import json

import pytest

from tasktalk.analytics import analyze_logs, format_report, load_ratings


def write_log(path, conversations):
    with open(path, "w", encoding="utf-8") as fh:
        for sid, turns in conversations.items():
            for i, (intent, responder) in enumerate(turns):
                fh.write(
                    json.dumps(
                        {
                            "session_id": sid,
                            "turn_index": i,
                            "phase": "Completion",
                            "initiative": "High",
                            "intent": intent,
                            "responder_id": responder,
                            "latency_ms": 1.0,
                        }
                    )
                    + "\n"
                )


def test_groups_by_initial_intent_and_final_responder(tmp_path):
    log = tmp_path / "turns.jsonl"
    write_log(
        log,
        {
            "a": [("Request", "show-explicit-options"), ("Navigation", "task-content")],
            "b": [("Recommend", "recommender")],
            "c": [("Request", "show-explicit-options"), ("Stop", "task-completed")],
        },
    )
    report = analyze_logs(log)
    assert report.conversation_count == 3
    assert report.turn_count == 5
    assert report.initial_intent_counts == {"Request": 2, "Recommend": 1}
    assert report.final_responder_counts == {
        "task-content": 1,
        "recommender": 1,
        "task-completed": 1,
    }


def test_malformed_records_are_skipped_not_fatal(tmp_path):
    log = tmp_path / "turns.jsonl"
    good = {
        "session_id": "a",
        "turn_index": 0,
        "phase": "Initialization",
        "initiative": "Low",
        "intent": "Chitchat",
        "responder_id": "launch",
        "latency_ms": 1.0,
    }
    lines = [json.dumps(good), "{not json", json.dumps({"session_id": "b"}), ""]
    log.write_text("\n".join(lines) + "\n", encoding="utf-8")
    report = analyze_logs(log)
    assert report.conversation_count == 1
    assert report.skipped_records == 2


def test_ratings_join_and_ci(tmp_path):
    log = tmp_path / "turns.jsonl"
    write_log(
        log,
        {
            "a": [("Request", "task-content")],
            "b": [("Request", "task-content")],
            "c": [("Request", "task-content")],
            "d": [("Recommend", "recommender")],
            "e": [("Recommend", "recommender")],
        },
    )
    csv_path = tmp_path / "ratings.csv"
    csv_path.write_text(
        "session_id,rating\na,4\nb,2\nc,3\nd,5\nmissing,1\nbroken,not-a-number\n",
        encoding="utf-8",
    )
    report = analyze_logs(log, ratings_path=csv_path)
    assert report.rated_count == 4
    assert report.unrated_count == 1
    stat = report.rating_by_initial_intent["Request"]
    assert stat.count == 3
    assert stat.mean == pytest.approx(3.0)
    # sample sd = 1, half-width = 1.96 * 1/sqrt(3)
    half = 1.96 / (3**0.5)
    assert stat.ci95 == (pytest.approx(3.0 - half), pytest.approx(3.0 + half))
    single = report.rating_by_initial_intent["Recommend"]
    assert single.count == 1 and single.mean == pytest.approx(5.0) and single.ci95 is None


def test_load_ratings_skips_bad_rows(tmp_path):
    csv_path = tmp_path / "ratings.csv"
    csv_path.write_text("session_id,rating\nx,4.5\n,3\ny,\nz,oops\n", encoding="utf-8")
    assert load_ratings(csv_path) == {"x": 4.5}


def test_format_report_is_readable(tmp_path):
    log = tmp_path / "turns.jsonl"
    write_log(log, {"a": [("Request", "task-content")]})
    text = format_report(analyze_logs(log))
    assert "conversations: 1" in text
    assert "Request: 1" in text

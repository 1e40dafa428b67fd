import pytest

from sqlarena.execution import STATUS_SQL_ERROR, ExecutionOutcome, outcome_from_rows
from sqlarena.ingest import CandidatePool, CandidateSql, Question, SchemaSnapshot
from sqlarena.prefdata import (
    SKIP_GOLD_FAILED,
    SKIP_NO_GOLD_CLUSTER,
    PreferencePairSkip,
    build_preference_pairs,
    evaluate_reward,
    export_pairs,
    load_pairs,
    question_context,
)

SNAP = SchemaSnapshot(db_id="synthetic", tables=())
Q = Question(id="q", text="what is the value", evidence="value means v", db_id="synthetic")


def _setup(values):
    pool = CandidatePool(
        question_id=Q.id,
        candidates=tuple(
            CandidateSql(index=i, sql=f"SELECT {v if v is not None else 'boom'} /* c{i} */")
            for i, v in enumerate(values)
        ),
    )
    outcomes = [
        ExecutionOutcome(status=STATUS_SQL_ERROR, error_message="boom")
        if v is None
        else outcome_from_rows([(v,)])
        for v in values
    ]
    return pool, outcomes


def test_question_context_with_and_without_evidence():
    assert question_context(Q) == "value means v\nwhat is the value"
    bare = Question(id="b", text="just this", evidence="", db_id="d")
    assert question_context(bare) == "just this"


def test_pair_count_is_min_of_positives_and_negatives():
    # |C_pos|=2, K=4 so K-1=3 negatives available: n=2, mirrored to 4.
    pool, outcomes = _setup([7, 7, 1, 2, 3])
    pairs = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    assert len(pairs) == 4


def test_positives_in_member_order_negatives_in_cluster_order():
    pool, outcomes = _setup([1, 7, 7, 7, 2, 3])
    pairs = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    unmirrored = pairs[::2]
    assert [p.y_pos for p in unmirrored] == [
        pool.candidates[1].sql,
        pool.candidates[2].sql,
        pool.candidates[3].sql,
    ]
    # Negative cluster order: cluster 0 (value 1), cluster 2 (value 2), cluster 3 (value 3).
    assert [p.y_neg for p in unmirrored] == [
        pool.candidates[0].sql,
        pool.candidates[4].sql,
        pool.candidates[5].sql,
    ]


def test_mirror_twin_flips_only_label_and_order():
    pool, outcomes = _setup([7, 1])
    first, twin = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    assert (first.label, first.order_id) == ("A", 0)
    assert (twin.label, twin.order_id) == ("B", 1)
    for field in ("question_id", "x", "d_uni_text", "y_pos", "y_neg", "e_pos", "e_neg"):
        assert getattr(first, field) == getattr(twin, field)


def test_pair_payload_contents():
    pool, outcomes = _setup([7, 1])
    (pair, _) = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    assert pair.question_id == "q"
    assert pair.x == "value means v\nwhat is the value"
    assert pair.y_pos == pool.candidates[0].sql
    assert pair.y_neg == pool.candidates[1].sql
    assert pair.e_pos == "[[7]]"
    assert pair.e_neg == "[[1]]"


def test_failed_candidates_never_appear():
    pool, outcomes = _setup([7, None, 1])
    pairs = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    texts = {p.y_pos for p in pairs} | {p.y_neg for p in pairs}
    assert pool.candidates[1].sql not in texts
    assert len(pairs) == 2


def test_gold_execution_failure_skips():
    pool, outcomes = _setup([7, 1])
    bad_gold = ExecutionOutcome(status=STATUS_SQL_ERROR, error_message="x")
    with pytest.raises(PreferencePairSkip) as exc:
        build_preference_pairs(Q, pool, outcomes, bad_gold, SNAP)
    assert exc.value.reason == SKIP_GOLD_FAILED
    with pytest.raises(PreferencePairSkip):
        build_preference_pairs(Q, pool, outcomes, None, SNAP)


def test_no_gold_cluster_skips():
    pool, outcomes = _setup([7, 1])
    with pytest.raises(PreferencePairSkip) as exc:
        build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(99,)]), SNAP)
    assert exc.value.reason == SKIP_NO_GOLD_CLUSTER


def test_single_cluster_yields_empty_list_not_skip():
    pool, outcomes = _setup([7, 7, 7])
    pairs = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    assert pairs == []


def test_reward_triple():
    assert evaluate_reward("<think>because</think><answer>B</answer>", "B") == 1
    # Right label, broken format.
    assert evaluate_reward("obviously <answer>B</answer>", "B") == 0
    # Clean format, wrong label.
    assert evaluate_reward("<think>hmm</think><answer>A</answer>", "B") == 0


def test_reward_rejects_bad_gold_label():
    with pytest.raises(ValueError):
        evaluate_reward("<think>x</think><answer>A</answer>", "C")


def test_export_and_load_round_trip(tmp_path):
    pool, outcomes = _setup([7, 7, 1, 2])
    pairs = build_preference_pairs(Q, pool, outcomes, outcome_from_rows([(7,)]), SNAP)
    out = tmp_path / "pairs.jsonl"
    assert export_pairs(pairs, out) == len(pairs) == 4
    again = load_pairs(out)
    assert again == pairs
    first_line = out.read_text().splitlines()[0]
    assert '"d_uni"' in first_line
    assert '"d_uni_text"' not in first_line


def test_fixture_pairs(bench):
    q = bench.by_id["toy-orders"]
    pairs = build_preference_pairs(
        q,
        bench.pools[q.id],
        bench.outcomes[q.id],
        bench.gold[q.id],
        bench.snapshots[q.db_id],
    )
    # K=3 with |C_pos|=5: n = min(5, 2) = 2, mirrored to 4.
    assert len(pairs) == 4
    for pair in pairs:
        assert pair.e_pos != pair.e_neg
        assert "CREATE TABLE" in pair.d_uni_text

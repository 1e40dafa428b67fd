import sqlite3

from sqlarena.execution import results_equivalent
from sqlarena.toybench import build_toybench


def test_build_is_reproducible(tmp_path):
    first = build_toybench(tmp_path / "one")
    second = build_toybench(tmp_path / "two")
    assert first.dataset.read_bytes() == second.dataset.read_bytes()
    assert first.candidates.read_bytes() == second.candidates.read_bytes()


def test_rebuild_overwrites_in_place(tmp_path):
    paths = build_toybench(tmp_path / "bench")
    before = paths.dataset.read_bytes()
    paths = build_toybench(tmp_path / "bench")
    assert paths.dataset.read_bytes() == before


def test_databases_queryable(toy):
    conn = sqlite3.connect(toy.db_root / "minishop" / "minishop.sqlite")
    try:
        (n,) = conn.execute("SELECT COUNT(*) FROM products").fetchone()
        assert n > 0
    finally:
        conn.close()
    conn = sqlite3.connect(toy.db_root / "card_games" / "card_games.sqlite")
    try:
        tables = {
            row[0]
            for row in conn.execute(
                "SELECT name FROM sqlite_master WHERE type = 'table'"
            )
        }
        assert {"sets", "set_translations", "cards"} <= tables
    finally:
        conn.close()


def test_case_study_result_values(bench):
    # Question 506's two candidates disagree; only candidate 1 matches gold.
    outcomes = bench.outcomes["506"]
    assert [o.raw_rows for o in outcomes] == [
        ((153.8992408557626,),),
        ((11.570247933884298,),),
    ]
    gold = bench.gold["506"]
    assert not results_equivalent(outcomes[0], gold)
    assert results_equivalent(outcomes[1], gold)


def test_every_question_has_a_gold_match(bench):
    for q in bench.questions:
        gold = bench.gold[q.id]
        assert gold.ok, q.id
        assert any(
            results_equivalent(out, gold) for out in bench.outcomes[q.id]
        ), q.id

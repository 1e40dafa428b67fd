import json
import sqlite3

import pytest

from sqlarena.ingest import (
    IngestError,
    database_path,
    export_candidates,
    load_candidates,
    load_dataset,
    load_schema,
    validate_pools,
)


def _write_jsonl(path, records):
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def test_load_dataset_bundled(bench):
    ids = [q.id for q in bench.questions]
    assert ids == ["toy-avg", "toy-count", "toy-orders", "506"]
    q = bench.by_id["toy-avg"]
    assert q.evidence == ""
    assert q.difficulty == "simple"
    assert bench.by_id["506"].db_id == "card_games"


def test_duplicate_question_id_rejected(tmp_path):
    p = tmp_path / "d.jsonl"
    row = {"id": "q1", "question": "?", "db_id": "db"}
    _write_jsonl(p, [row, row])
    with pytest.raises(IngestError, match="duplicate"):
        load_dataset(p)


def test_missing_field_reports_line(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_jsonl(p, [{"id": "q1", "question": "?", "db_id": "db"}, {"id": "q2", "db_id": "db"}])
    with pytest.raises(IngestError, match="line 2"):
        load_dataset(p)


def test_bad_difficulty_rejected(tmp_path):
    p = tmp_path / "d.jsonl"
    _write_jsonl(p, [{"id": "q", "question": "?", "db_id": "db", "difficulty": "extreme"}])
    with pytest.raises(IngestError, match="difficulty"):
        load_dataset(p)


def test_json_array_also_accepted(tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps([{"id": "q", "question": "?", "db_id": "db"}]))
    assert len(load_dataset(p)) == 1


def test_load_candidates_bundled(bench):
    pool = bench.pools["toy-orders"]
    assert len(pool.candidates) == 7
    assert pool.candidates[0].index == 0
    assert pool.candidates[0].generator_tag == "toybench"


def test_duplicate_pool_rejected(tmp_path):
    p = tmp_path / "c.jsonl"
    row = {"question_id": "q1", "candidates": ["SELECT 1"]}
    _write_jsonl(p, [row, row])
    with pytest.raises(IngestError, match="pre-merged"):
        load_candidates(p)


def test_empty_pool_rejected(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_jsonl(p, [{"question_id": "q1", "candidates": []}])
    with pytest.raises(IngestError):
        load_candidates(p)


def test_duplicate_sql_texts_kept(tmp_path):
    p = tmp_path / "c.jsonl"
    _write_jsonl(p, [{"question_id": "q1", "candidates": ["SELECT 1", "SELECT 1"]}])
    pool = load_candidates(p)["q1"]
    assert pool.sql_texts() == ["SELECT 1", "SELECT 1"]


def test_candidates_round_trip(bench, tmp_path):
    out = tmp_path / "copy.jsonl"
    count = export_candidates(bench.pools, out)
    assert count == len(bench.pools)
    again = load_candidates(out)
    assert {k: v.sql_texts() for k, v in again.items()} == {
        k: v.sql_texts() for k, v in bench.pools.items()
    }


def test_validate_pools_unknown_id(bench, tmp_path):
    p = tmp_path / "c.jsonl"
    _write_jsonl(p, [{"question_id": "ghost", "candidates": ["SELECT 1"]}])
    pools = load_candidates(p)
    with pytest.raises(IngestError, match="ghost"):
        validate_pools(bench.questions, pools)


def test_database_path_layout(tmp_path):
    assert database_path(tmp_path, "bird") == tmp_path / "bird" / "bird.sqlite"


def test_load_schema_minishop(bench):
    snap = bench.snapshots["minishop"]
    assert snap.table_names() == ["products", "orders"]
    products = snap.find_table("PRODUCTS")
    assert products is not None
    assert [c[0].lower() for c in products.columns] == ["id", "name", "price"]
    assert products.primary_key == ("id",)
    orders = snap.find_table("orders")
    assert ("product_id", "products", "id") in orders.foreign_keys
    assert "CREATE TABLE" in products.ddl


def test_load_schema_missing_file(tmp_path):
    with pytest.raises(IngestError):
        load_schema(tmp_path / "nope" / "nope.sqlite")


def test_load_schema_excludes_views(tmp_path):
    db = tmp_path / "v.sqlite"
    conn = sqlite3.connect(db)
    conn.executescript(
        "CREATE TABLE t (a INTEGER); CREATE VIEW v AS SELECT a FROM t;"
    )
    conn.close()
    snap = load_schema(db)
    assert snap.table_names() == ["t"]


def test_load_schema_dangling_fk_rejected(tmp_path):
    db = tmp_path / "fk.sqlite"
    conn = sqlite3.connect(db)
    conn.executescript(
        "PRAGMA foreign_keys=OFF;"
        "CREATE TABLE child (a INTEGER, FOREIGN KEY (a) REFERENCES ghost (id));"
    )
    conn.close()
    with pytest.raises(IngestError, match="ghost"):
        load_schema(db)

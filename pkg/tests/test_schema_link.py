import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqlarena.ingest import SchemaSnapshot, TableInfo
from sqlarena.schema_link import (
    TableExtractionError,
    build_union_schema,
    extract_referenced_tables,
)


def _table(name):
    return TableInfo(
        name=name,
        columns=(("id", "INTEGER"),),
        primary_key=("id",),
        foreign_keys=(),
        ddl=f"CREATE TABLE {name} (id INTEGER)",
    )


SNAP = SchemaSnapshot(
    db_id="shop",
    tables=tuple(_table(n) for n in ("products", "orders", "users", "Payments")),
)


def test_simple_from():
    assert extract_referenced_tables("SELECT * FROM products", SNAP) == {"products"}


def test_joins_and_aliases():
    sql = (
        "SELECT u.id FROM users AS u "
        "JOIN orders o ON o.id = u.id "
        "LEFT OUTER JOIN products ON products.id = o.id"
    )
    assert extract_referenced_tables(sql, SNAP) == {"users", "orders", "products"}


def test_case_insensitive_matches_snapshot_casing():
    assert extract_referenced_tables("SELECT 1 FROM PAYMENTS", SNAP) == {"Payments"}
    assert extract_referenced_tables('SELECT 1 FROM "payments"', SNAP) == {"Payments"}


def test_quoted_identifier_styles():
    for quoted in ('"orders"', "`orders`", "[orders]"):
        assert extract_referenced_tables(f"SELECT 1 FROM {quoted}", SNAP) == {"orders"}


def test_comma_separated_from_list():
    sql = "SELECT 1 FROM products p, orders, users AS u WHERE p.id = orders.id"
    assert extract_referenced_tables(sql, SNAP) == {"products", "orders", "users"}


def test_dotted_schema_prefix_keeps_table():
    assert extract_referenced_tables("SELECT 1 FROM main.orders", SNAP) == {"orders"}


def test_subquery_tables_found():
    sql = "SELECT 1 FROM (SELECT id FROM orders) t JOIN users ON 1=1"
    assert extract_referenced_tables(sql, SNAP) == {"orders", "users"}


def test_cte_alias_not_reported_but_cte_body_is():
    sql = (
        "WITH recent AS (SELECT id FROM orders) "
        "SELECT * FROM recent JOIN products ON 1=1"
    )
    assert extract_referenced_tables(sql, SNAP) == {"orders", "products"}


def test_unknown_table_dropped():
    assert extract_referenced_tables("SELECT 1 FROM elsewhere", SNAP) == set()


def test_table_valued_function_skipped():
    assert extract_referenced_tables(
        "SELECT value FROM json_each('[1]') JOIN users ON 1=1", SNAP
    ) == {"users"}


def test_strings_and_comments_ignored():
    sql = (
        "SELECT 'FROM users' AS t -- FROM products\n"
        "FROM orders /* JOIN users */"
    )
    assert extract_referenced_tables(sql, SNAP) == {"orders"}


def test_keyword_in_identifier_not_a_clause():
    # "throwfrom" contains FROM as a substring; must not start a table scan.
    snap = SchemaSnapshot(db_id="x", tables=(_table("throwfrom"), _table("users")))
    sql = "SELECT throwfrom FROM users"
    assert extract_referenced_tables(sql, snap) == {"users"}


def test_dangling_from_rejected():
    with pytest.raises(TableExtractionError):
        extract_referenced_tables("SELECT 1 FROM", SNAP)


def test_unbalanced_parens_rejected():
    with pytest.raises(TableExtractionError):
        extract_referenced_tables("SELECT 1 FROM (SELECT id FROM orders", SNAP)


def test_unterminated_string_rejected():
    with pytest.raises(TableExtractionError):
        extract_referenced_tables("SELECT 'oops FROM users", SNAP)


def test_union_schema_happy_path():
    union = build_union_schema(SNAP, "SELECT 1 FROM orders", "SELECT 1 FROM users")
    assert union.db_id == "shop"
    assert union.fallback_used is False
    # Catalog order, not mention order.
    assert union.table_names == ("orders", "users")
    assert union.ddl_text == (
        "CREATE TABLE orders (id INTEGER);\n\nCREATE TABLE users (id INTEGER);"
    )


def test_union_schema_shared_table_once():
    union = build_union_schema(SNAP, "SELECT 1 FROM orders", "SELECT 2 FROM orders")
    assert union.table_names == ("orders",)


def test_union_schema_falls_back_to_full_snapshot():
    union = build_union_schema(SNAP, "SELECT 1 FROM ((( nope", "SELECT 1 FROM orders")
    assert union.fallback_used is True
    assert union.table_names == tuple(t.name for t in SNAP.tables)


def test_union_schema_real_fixture(bench):
    snap = bench.snapshots["minishop"]
    pool = bench.pools["toy-orders"]
    union = build_union_schema(snap, pool.candidates[0].sql, pool.candidates[5].sql)
    assert "CREATE TABLE" in union.ddl_text
    assert set(union.table_names) <= set(snap.table_names())


@given(st.text(max_size=120))
def test_extractor_total_on_arbitrary_text(sql):
    # Any input either extracts cleanly or raises the typed error.
    try:
        names = extract_referenced_tables(sql, SNAP)
    except TableExtractionError:
        return
    assert names <= {t.name for t in SNAP.tables}

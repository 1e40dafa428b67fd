"""Export preference pairs from the toy benchmark and inspect one mirror.

Each pair couples a gold-equivalent SQL with the proxy of one wrong-result
cluster and is written twice, once per slot order, so a trainee judge sees
the correct answer in both positions equally often.
"""

import tempfile
from pathlib import Path

import sqlarena as sa


def main() -> None:
    root = Path(tempfile.mkdtemp(prefix="sqlarena-demo-"))
    toy = sa.build_toybench(root)
    questions = {q.id: q for q in sa.load_dataset(toy.dataset)}
    pools = sa.load_candidates(toy.candidates)
    config = sa.NormalizationConfig()

    q = questions["toy-orders"]
    db = sa.database_path(toy.db_root, q.db_id)
    outcomes = sa.execute_pool(db, pools[q.id].sql_texts(), config)
    conn = sa.open_database(str(db))
    try:
        gold = sa.execute_sql(conn, q.gold_sql, config)
    finally:
        conn.close()
    snapshot = sa.load_schema(db)

    pairs = sa.build_preference_pairs(q, pools[q.id], outcomes, gold, snapshot)
    out = root / "prefpairs.jsonl"
    count = sa.export_pairs(pairs, out)
    print(f"exported {count} records to {out}")
    print()

    first, twin = pairs[0], pairs[1]
    print(f"question:   {first.x!r}")
    print(f"y_pos:      {first.y_pos}")
    print(f"y_neg:      {first.y_neg}")
    print(f"e_pos:      {first.e_pos}   e_neg: {first.e_neg}")
    print(f"record 0:   label={first.label} order_id={first.order_id}")
    print(f"record 1:   label={twin.label} order_id={twin.order_id}  (same content, mirrored slot)")
    print()
    print("reward checks on the gold label of record 0:")
    for output in (
        "<think>the sum matches</think><answer>A</answer>",
        "<answer>A</answer>",
        "<think>the sum matches</think><answer>B</answer>",
    ):
        print(f"  {sa.evaluate_reward(output, first.label)}  <- {output}")


if __name__ == "__main__":
    main()

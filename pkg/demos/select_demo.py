"""Run all four selection strategies over the bundled toy benchmark.

The fixture is built so the strategies disagree in known ways: on two of
the four questions the largest cluster is wrong, so majority voting tops
out at 50% while any oracle-judged tournament reaches 100%.
"""

import tempfile
from pathlib import Path

import sqlarena as sa


def main() -> None:
    root = Path(tempfile.mkdtemp(prefix="sqlarena-demo-"))
    toy = sa.build_toybench(root)
    questions = sa.load_dataset(toy.dataset)
    pools = sa.load_candidates(toy.candidates)
    config = sa.NormalizationConfig()

    outcomes, gold, snapshots = {}, {}, {}
    for q in questions:
        db = sa.database_path(toy.db_root, q.db_id)
        if q.db_id not in snapshots:
            snapshots[q.db_id] = sa.load_schema(db)
        outcomes[q.id] = sa.execute_pool(db, pools[q.id].sql_texts(), config)
        conn = sa.open_database(str(db))
        try:
            gold[q.id] = sa.execute_sql(conn, q.gold_sql, config)
        finally:
            conn.close()

    judge = sa.OracleJudge(gold)
    print(f"{'strategy':<10} {'EX %':>7} {'avg judgments':>14}")
    for strategy in ("sc", "ct", "wct", "drt"):
        evals = []
        for q in questions:
            res = sa.select(
                q, pools[q.id], outcomes[q.id], strategy,
                judge=judge, snapshot=snapshots[q.db_id],
            )
            evals.append(
                sa.QuestionEval(
                    question_id=q.id,
                    result=res,
                    selected_outcome=outcomes[q.id][res.selected_candidate_index],
                    gold_outcome=gold[q.id],
                )
            )
        summary = sa.summarize(strategy, evals)
        print(f"{strategy:<10} {summary.ex_percent:>7.1f} {summary.avg_judgments:>14.1f}")

    print()
    print("Per-question winners under WCT:")
    for q in questions:
        res = sa.select(
            q, pools[q.id], outcomes[q.id], "wct",
            judge=judge, snapshot=snapshots[q.db_id],
        )
        ok = sa.results_equivalent(
            outcomes[q.id][res.selected_candidate_index], gold[q.id]
        )
        print(f"  {q.id:<12} cluster {res.winner_cluster} "
              f"scores={list(res.scores)} weighted={list(res.weighted_scores)} "
              f"{'correct' if ok else 'WRONG'}")


if __name__ == "__main__":
    main()

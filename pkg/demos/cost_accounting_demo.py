"""How judgment counts scale: clusters vs individual candidates.

A cluster tournament pays K(K-1) judgments where K is the number of
distinct execution results; judging every executable candidate pays
M(M-1).  Real pools have far fewer distinct results than candidates, so
the gap widens fast with pool size.
"""

import random

from sqlarena.clustering import cluster_candidates
from sqlarena.execution import outcome_from_rows
from sqlarena.ingest import CandidatePool, CandidateSql, Question, SchemaSnapshot
from sqlarena.judge import WINNER_A, JudgmentOutcome
from sqlarena.tournament import run_drt, run_wct

SNAP = SchemaSnapshot(db_id="synthetic", tables=())
Q = Question(id="cost", text="which value", evidence="", db_id="synthetic")


class CountingStub:
    tag = "counting"

    def judge(self, req):
        return JudgmentOutcome(
            winner=WINNER_A,
            raw_response="<think>stub</think><answer>A</answer>",
            format_ok=True,
            backend_tag=self.tag,
        )


def pool_of(m: int, k: int, rng: random.Random):
    values = [rng.randrange(k) for _ in range(m)]
    # Guarantee every cluster value appears at least once.
    values[:k] = range(k)
    pool = CandidatePool(
        question_id=Q.id,
        candidates=tuple(
            CandidateSql(index=i, sql=f"SELECT {v} AS c{i}") for i, v in enumerate(values)
        ),
    )
    outcomes = [outcome_from_rows([(v,)]) for v in values]
    return pool, outcomes


def main() -> None:
    rng = random.Random(0)
    stub = CountingStub()
    print(f"{'M':>4} {'K':>3} {'WCT judgments':>14} {'DRT judgments':>14} {'ratio':>7}")
    for m in (8, 16, 32, 64):
        k = 5
        pool, outcomes = pool_of(m, k, rng)
        clusters = cluster_candidates(pool, outcomes).clusters
        wct = run_wct(Q, clusters, pool, outcomes, stub, SNAP)
        drt = run_drt(Q, pool, outcomes, stub, SNAP)
        ratio = drt.judgment_count / max(wct.judgment_count, 1)
        print(
            f"{m:>4} {len(clusters):>3} {wct.judgment_count:>14} "
            f"{drt.judgment_count:>14} {ratio:>7.1f}"
        )
    print()
    print("WCT cost depends only on the number of distinct results, so it is")
    print("flat in pool size; DRT grows quadratically with the pool.")


if __name__ == "__main__":
    main()

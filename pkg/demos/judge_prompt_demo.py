"""Render a pairwise judging prompt and parse a model-style response.

Uses the benchmark's 1-vs-1 question: two SQLs that disagree because one
counts join rows while the other counts sets.  The prompt shows only the
tables either query touches, not the whole database.
"""

import tempfile
from pathlib import Path

import sqlarena as sa
from sqlarena.schema_link import build_union_schema


def main() -> None:
    root = Path(tempfile.mkdtemp(prefix="sqlarena-demo-"))
    toy = sa.build_toybench(root)
    questions = {q.id: q for q in sa.load_dataset(toy.dataset)}
    pools = sa.load_candidates(toy.candidates)
    config = sa.NormalizationConfig()

    q = questions["506"]
    db = sa.database_path(toy.db_root, q.db_id)
    sql_a, sql_b = pools[q.id].sql_texts()
    outcomes = sa.execute_pool(db, [sql_a, sql_b], config)
    snapshot = sa.load_schema(db)

    union = build_union_schema(snapshot, sql_a, sql_b)
    print(f"tables shown to the judge: {', '.join(union.table_names)}")
    request = sa.make_request(
        q, union, sql_a, outcomes[0], sql_b, outcomes[1], template="rjudge"
    )
    prompt = sa.render_prompt(request)
    print(f"prompt length: {len(prompt)} characters")
    print()
    print("---- prompt, candidate section ----")
    start = prompt.index("Candidate A:")
    end = prompt.index("Instructions:")
    print(prompt[start:end].rstrip())
    print()

    response = (
        "<think>The question asks what percentage of Japanese-translated sets "
        "are non-foil only. Candidate A divides join rows by join rows, counting "
        "every card once per translation; sets are counted many times. Candidate "
        "B counts each qualifying set exactly once.</think><answer>B</answer>"
    )
    parsed = sa.parse_judgment(response)
    print(f"parsed winner: {parsed.winner}   format_ok: {parsed.format_ok}")


if __name__ == "__main__":
    main()

from types import SimpleNamespace

import pytest
from hypothesis import settings

import sqlarena as sa
from sqlarena.ingest import database_path

settings.register_profile("suite", deadline=None, derandomize=True)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def toy(tmp_path_factory):
    """Paths of a freshly built bundled benchmark."""
    return sa.build_toybench(tmp_path_factory.mktemp("toybench"))


@pytest.fixture(scope="session")
def bench(toy):
    """Everything executed: questions, pools, outcomes, gold, snapshots."""
    questions = sa.load_dataset(toy.dataset)
    pools = sa.load_candidates(toy.candidates)
    config = sa.NormalizationConfig()
    outcomes, gold, snapshots, db_paths = {}, {}, {}, {}
    for q in questions:
        db_path = database_path(toy.db_root, q.db_id)
        db_paths[q.db_id] = db_path
        if q.db_id not in snapshots:
            snapshots[q.db_id] = sa.load_schema(db_path)
        outcomes[q.id] = sa.execute_pool(db_path, pools[q.id].sql_texts(), config)
        conn = sa.open_database(db_path)
        try:
            gold[q.id] = sa.execute_sql(conn, q.gold_sql, config)
        finally:
            conn.close()
    return SimpleNamespace(
        paths=toy,
        questions=questions,
        by_id={q.id: q for q in questions},
        pools=pools,
        outcomes=outcomes,
        gold=gold,
        snapshots=snapshots,
        db_paths=db_paths,
        config=config,
    )

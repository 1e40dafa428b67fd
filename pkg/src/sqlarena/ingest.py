"""Load benchmark questions, candidate pools, and schema snapshots.

File formats (line-delimited JSON; a single top-level array is also accepted):

  dataset:    {"id", "question", "evidence", "db_id", "gold_sql", "difficulty"}
  candidates: {"question_id", "candidates": [sql, ...], "generator_tag"}

Unknown fields are ignored so files from heterogeneous generator pipelines
load as-is.  Loaded structures are frozen and safe to share across threads.
"""

from __future__ import annotations

import json
import sqlite3
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

DIFFICULTIES = ("simple", "moderate", "challenging")


class IngestError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    evidence: str
    db_id: str
    gold_sql: str | None = None
    difficulty: str | None = None


@dataclass(frozen=True)
class CandidateSql:
    index: int
    sql: str
    generator_tag: str | None = None


@dataclass(frozen=True)
class CandidatePool:
    question_id: str
    candidates: tuple[CandidateSql, ...]

    def sql_texts(self) -> list[str]:
        return [c.sql for c in self.candidates]


@dataclass(frozen=True)
class TableInfo:
    name: str
    columns: tuple[tuple[str, str], ...]  # (column name, declared type)
    primary_key: tuple[str, ...]
    foreign_keys: tuple[tuple[str, str, str], ...]  # (column, ref table, ref column)
    ddl: str


@dataclass(frozen=True)
class SchemaSnapshot:
    db_id: str
    tables: tuple[TableInfo, ...]

    def table_names(self) -> list[str]:
        return [t.name for t in self.tables]

    def find_table(self, name: str) -> TableInfo | None:
        lowered = name.lower()
        for table in self.tables:
            if table.name.lower() == lowered:
                return table
        return None


def _iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line number, record) from JSONL or a single JSON array."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("["):
        try:
            records = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: invalid JSON array: {exc}") from exc
        for i, record in enumerate(records, start=1):
            if not isinstance(record, dict):
                raise IngestError(f"{path}: entry {i}: expected object")
            yield i, record
        return
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
        if not isinstance(record, dict):
            raise IngestError(f"{path}: line {lineno}: expected object")
        yield lineno, record


def _require(record: dict, field: str, lineno: int, path) -> object:
    if field not in record or record[field] is None:
        raise IngestError(f"{path}: line {lineno}: missing field '{field}'")
    return record[field]


def load_dataset(path: str | Path) -> list[Question]:
    """Parse a dataset file into questions; duplicate ids are an error."""
    questions: list[Question] = []
    seen: set[str] = set()
    for lineno, record in _iter_records(path):
        qid = str(_require(record, "id", lineno, path))
        if qid in seen:
            raise IngestError(f"{path}: line {lineno}: duplicate id '{qid}'")
        seen.add(qid)
        text = str(_require(record, "question", lineno, path))
        db_id = str(_require(record, "db_id", lineno, path))
        evidence = record.get("evidence") or ""
        if not isinstance(evidence, str):
            raise IngestError(f"{path}: line {lineno}: field 'evidence' must be a string")
        gold = record.get("gold_sql")
        if gold is not None and not isinstance(gold, str):
            raise IngestError(f"{path}: line {lineno}: field 'gold_sql' must be a string")
        difficulty = record.get("difficulty")
        if difficulty is not None and difficulty not in DIFFICULTIES:
            raise IngestError(
                f"{path}: line {lineno}: field 'difficulty' must be one of "
                f"{DIFFICULTIES}, got {difficulty!r}"
            )
        questions.append(
            Question(
                id=qid,
                text=text,
                evidence=evidence,
                db_id=db_id,
                gold_sql=gold,
                difficulty=difficulty,
            )
        )
    return questions


def load_candidates(path: str | Path) -> dict[str, CandidatePool]:
    """Parse a candidate file into per-question pools, order preserved.

    Duplicate SQL strings are kept as distinct samples: downstream clustering
    counts frequency.  Two records for one question are an error; pools must
    arrive pre-merged.
    """
    pools: dict[str, CandidatePool] = {}
    for lineno, record in _iter_records(path):
        qid = str(_require(record, "question_id", lineno, path))
        if qid in pools:
            raise IngestError(
                f"{path}: line {lineno}: second record for question '{qid}' (pools must be pre-merged)"
            )
        raw = _require(record, "candidates", lineno, path)
        if not isinstance(raw, list):
            raise IngestError(f"{path}: line {lineno}: field 'candidates' must be a list")
        if not raw:
            raise IngestError(f"{path}: line {lineno}: empty candidate list for '{qid}'")
        tag = record.get("generator_tag")
        candidates = []
        for i, sql in enumerate(raw):
            if not isinstance(sql, str) or not sql.strip():
                raise IngestError(
                    f"{path}: line {lineno}: field 'candidates' entry {i} is empty or not a string"
                )
            candidates.append(CandidateSql(index=i, sql=sql, generator_tag=tag))
        pools[qid] = CandidatePool(question_id=qid, candidates=tuple(candidates))
    return pools


def export_candidates(pools: dict[str, CandidatePool], path: str | Path) -> int:
    """Write pools back out in the candidate-file format; returns line count."""
    lines = []
    for qid, pool in pools.items():
        tag = pool.candidates[0].generator_tag if pool.candidates else None
        lines.append(
            json.dumps(
                {"question_id": qid, "candidates": pool.sql_texts(), "generator_tag": tag},
                ensure_ascii=False,
            )
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return len(lines)


def validate_pools(questions: list[Question], pools: dict[str, CandidatePool]) -> None:
    """Referential check: every pool must belong to a dataset question."""
    known = {q.id for q in questions}
    unknown = sorted(qid for qid in pools if qid not in known)
    if unknown:
        raise IngestError(f"candidate pools reference unknown question ids: {unknown}")


def database_path(db_root: str | Path, db_id: str) -> Path:
    """BIRD directory convention: <root>/<db_id>/<db_id>.sqlite."""
    return Path(db_root) / db_id / f"{db_id}.sqlite"


def load_schema(db_path: str | Path) -> SchemaSnapshot:
    """Snapshot every user table (views and sqlite internals excluded)."""
    path = Path(db_path)
    if not path.exists():
        raise IngestError(f"database file not found: {path}")
    try:
        conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    except sqlite3.Error as exc:
        raise IngestError(f"cannot open database {path}: {exc}") from exc
    try:
        try:
            rows = conn.execute(
                "SELECT name, sql FROM sqlite_master"
                " WHERE type = 'table' AND name NOT LIKE 'sqlite_%'"
            ).fetchall()
        except sqlite3.Error as exc:
            raise IngestError(f"cannot read catalog of {path}: {exc}") from exc
        tables = []
        for name, ddl in rows:
            columns = []
            pk: list[tuple[int, str]] = []
            for _, col_name, col_type, _, _, pk_pos in conn.execute(
                f'PRAGMA table_info("{name}")'
            ):
                columns.append((col_name, col_type))
                if pk_pos:
                    pk.append((pk_pos, col_name))
            fks = [
                (src, ref_table, ref_col or "")
                for _, _, ref_table, src, ref_col, *_ in conn.execute(
                    f'PRAGMA foreign_key_list("{name}")'
                )
            ]
            tables.append(
                TableInfo(
                    name=name,
                    columns=tuple(columns),
                    primary_key=tuple(col for _, col in sorted(pk)),
                    foreign_keys=tuple(fks),
                    ddl=ddl or "",
                )
            )
    finally:
        conn.close()

    names = {t.name.lower() for t in tables}
    for table in tables:
        for _, ref_table, _ in table.foreign_keys:
            if ref_table.lower() not in names:
                raise IngestError(
                    f"{path}: table '{table.name}' has a foreign key to missing table '{ref_table}'"
                )
    return SchemaSnapshot(db_id=path.stem, tables=tuple(tables))

"""SQLite execution and result canonicalization.

Running a candidate query yields an :class:`ExecutionOutcome`; two outcomes
are interchangeable for selection purposes iff both succeeded and their
canonical result forms are equal.  Canonicalization (cell rounding, row
ordering, set/multiset collapse) is controlled by :class:`NormalizationConfig`
and produces a stable fingerprint used to group candidates into
execution-consistent clusters.
"""

from __future__ import annotations

import hashlib
import math
import sqlite3
import time
from dataclasses import dataclass, field
from typing import Iterable, Literal, NamedTuple, Sequence

STATUS_OK = "ok"
STATUS_SQL_ERROR = "sql_error"
STATUS_TIMEOUT = "timeout"

Status = Literal["ok", "sql_error", "timeout"]

#: Rows shown in a rendered result before it is cut off with a count note.
#: Truncation applies to prompt rendering only, never to equivalence.
PROMPT_MAX_ROWS = 10


@dataclass(frozen=True)
class NormalizationConfig:
    """Knobs for result canonicalization and execution.

    float_precision: decimal places reals are rounded to before comparison.
    row_order: "insensitive" treats results as unordered; "sensitive" keeps
        the engine's row order as part of the canonical form.
    bag_semantics: "set" collapses duplicate rows, "multiset" keeps counts.
        Ignored when row_order is "sensitive".
    exec_timeout_ms: per-statement execution budget.
    """

    float_precision: int = 6
    row_order: Literal["insensitive", "sensitive"] = "insensitive"
    bag_semantics: Literal["set", "multiset"] = "set"
    exec_timeout_ms: int = 30_000


class BlobDigest(NamedTuple):
    """Canonical stand-in for a blob cell: its SHA-256 hex digest."""

    hexdigest: str


Cell = None | int | float | str | BlobDigest
Row = tuple[Cell, ...]


@dataclass(frozen=True)
class NormalizedResult:
    """Canonical form of a result set plus its equivalence fingerprint.

    ``rows`` hold canonical cells ordered per config; ``row_count`` is the
    raw row count before any set-collapse.  Fingerprint equality implies
    canonical-form equality only up to hash collisions, so equality checks
    always fall back to the full form (see :func:`results_equivalent`).
    """

    column_count: int
    rows: tuple[Row, ...]
    row_count: int
    fingerprint: str
    nonfinite_nulled: bool = False

    def same_form(self, other: "NormalizedResult") -> bool:
        return (
            self.fingerprint == other.fingerprint
            and self.column_count == other.column_count
            and self.rows == other.rows
        )


@dataclass(frozen=True)
class ExecutionOutcome:
    """Result of running one SQL statement.

    ``result`` is present iff status is "ok"; otherwise ``error_message``
    says what went wrong.  ``raw_rows`` keep the engine's values untouched
    (full precision, original order) for prompt rendering.
    """

    status: Status
    result: NormalizedResult | None = None
    error_message: str | None = None
    elapsed_ms: float = 0.0
    raw_rows: tuple[tuple, ...] | None = None

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def _canonical_cell(value, precision: int) -> tuple[Cell, bool]:
    """Map a raw SQLite cell to canonical form; flag nonfinite floats."""
    if value is None:
        return None, False
    if isinstance(value, bool):  # sqlite never yields bool; guard anyway
        return int(value), False
    if isinstance(value, int):
        return value, False
    if isinstance(value, float):
        if not math.isfinite(value):
            return None, True
        rounded = round(value, precision)
        # Integral reals collapse to int so 2.0 and 2 compare equal, the
        # convention execution-accuracy checkers follow.
        if rounded.is_integer() and abs(rounded) < 2**53:
            return int(rounded), False
        return rounded, False
    if isinstance(value, str):
        return value, False
    if isinstance(value, (bytes, bytearray, memoryview)):
        return BlobDigest(hashlib.sha256(bytes(value)).hexdigest()), False
    if isinstance(value, BlobDigest):
        return value, False
    # Registered adapters may hand back exotic types; stringify them.
    return str(value), False


def _cell_key(cell: Cell) -> str:
    if cell is None:
        return "n"
    if isinstance(cell, BlobDigest):
        return "b:" + cell.hexdigest
    if isinstance(cell, int):
        return "i:" + repr(cell)
    if isinstance(cell, float):
        return "r:" + repr(cell)
    return "t:" + cell


def _row_key(row: Row) -> str:
    return "\x1f".join(_cell_key(c) for c in row)


def normalize_result(
    rows: Iterable[Sequence],
    config: NormalizationConfig | None = None,
    column_count: int | None = None,
) -> NormalizedResult:
    """Canonicalize raw rows into a :class:`NormalizedResult`.

    Raises ValueError on ragged input.  ``column_count`` overrides the
    inferred arity; required to distinguish a zero-row, one-column result
    from a truly empty one.
    """
    cfg = config or NormalizationConfig()
    nonfinite = False
    canonical: list[Row] = []
    width: int | None = None
    raw_count = 0
    for raw in rows:
        raw_count += 1
        cells = []
        for value in raw:
            cell, flagged = _canonical_cell(value, cfg.float_precision)
            nonfinite = nonfinite or flagged
            cells.append(cell)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ValueError(
                f"ragged result: row {raw_count} has {len(cells)} cells, expected {width}"
            )
        canonical.append(tuple(cells))

    if column_count is None:
        column_count = width if width is not None else 0
    elif width is not None and width != column_count:
        raise ValueError(f"rows have {width} cells but column_count={column_count}")

    if cfg.row_order == "insensitive":
        if cfg.bag_semantics == "set":
            canonical = sorted(set(canonical), key=_row_key)
        else:
            canonical = sorted(canonical, key=_row_key)

    body = "\x1e".join(_row_key(r) for r in canonical)
    mode = f"{cfg.row_order}/{cfg.bag_semantics if cfg.row_order == 'insensitive' else '-'}"
    digest = hashlib.sha256(f"{mode}|{column_count}|{body}".encode()).hexdigest()
    return NormalizedResult(
        column_count=column_count,
        rows=tuple(canonical),
        row_count=raw_count,
        fingerprint=digest,
        nonfinite_nulled=nonfinite,
    )


def results_equivalent(a: ExecutionOutcome, b: ExecutionOutcome) -> bool:
    """True iff both executions succeeded and canonical forms match.

    A failed or timed-out outcome is equivalent to nothing, not even to
    another failure: errored candidates never cluster together.
    """
    if not (a.ok and b.ok):
        return False
    assert a.result is not None and b.result is not None
    return a.result.same_form(b.result)


def outcome_from_rows(
    rows: Sequence[Sequence],
    config: NormalizationConfig | None = None,
    column_count: int | None = None,
) -> ExecutionOutcome:
    """Wrap already-materialized rows as a successful outcome."""
    raw = tuple(tuple(r) for r in rows)
    result = normalize_result(raw, config, column_count=column_count)
    return ExecutionOutcome(status=STATUS_OK, result=result, raw_rows=raw)


def open_database(db_path: str) -> sqlite3.Connection:
    """Open a SQLite file read-only; writes fail at the engine level."""
    conn = sqlite3.connect(f"file:{db_path}?mode=ro", uri=True, check_same_thread=False)
    return conn


def execute_sql(
    conn: sqlite3.Connection,
    sql: str,
    config: NormalizationConfig | None = None,
    timeout_ms: int | None = None,
) -> ExecutionOutcome:
    """Run one statement and materialize its normalized result.

    The connection must be read-only (see :func:`open_database`); write
    statements therefore surface as sql_error and the file is untouched.
    Long statements are interrupted once ``timeout_ms`` elapses.
    """
    cfg = config or NormalizationConfig()
    budget_ms = cfg.exec_timeout_ms if timeout_ms is None else timeout_ms
    if budget_ms <= 0:
        raise ValueError("timeout must be positive")

    deadline = time.monotonic() + budget_ms / 1000.0
    timed_out = False

    def _tick():
        nonlocal timed_out
        if time.monotonic() > deadline:
            timed_out = True
            return 1
        return 0

    start = time.monotonic()
    conn.set_progress_handler(_tick, 2000)
    try:
        cursor = conn.execute(sql)
        raw_rows = tuple(tuple(row) for row in cursor.fetchall())
        column_count = len(cursor.description) if cursor.description else 0
    except (sqlite3.Error, sqlite3.Warning) as exc:
        # sqlite3.Warning (multi-statement input) is not an sqlite3.Error.
        elapsed = (time.monotonic() - start) * 1000.0
        if timed_out:
            return ExecutionOutcome(
                status=STATUS_TIMEOUT,
                error_message=f"timeout after {budget_ms} ms",
                elapsed_ms=elapsed,
            )
        return ExecutionOutcome(
            status=STATUS_SQL_ERROR,
            error_message=str(exc) or exc.__class__.__name__,
            elapsed_ms=elapsed,
        )
    finally:
        conn.set_progress_handler(None, 0)

    elapsed = (time.monotonic() - start) * 1000.0
    result = normalize_result(raw_rows, cfg, column_count=column_count)
    return ExecutionOutcome(
        status=STATUS_OK,
        result=result,
        elapsed_ms=elapsed,
        raw_rows=raw_rows,
    )


def execute_pool(
    db_path: str,
    sqls: Sequence[str],
    config: NormalizationConfig | None = None,
) -> list[ExecutionOutcome]:
    """Execute every SQL in order against one read-only connection."""
    conn = open_database(db_path)
    try:
        return [execute_sql(conn, sql, config) for sql in sqls]
    finally:
        conn.close()


def render_result(outcome: ExecutionOutcome, max_rows: int = PROMPT_MAX_ROWS) -> str:
    """Render an outcome for a judge prompt.

    Successful results print as a list of row lists at full raw precision;
    past ``max_rows`` the tail is replaced with a total-row-count note.
    """
    if not outcome.ok:
        return f"Error: {outcome.error_message}"
    rows = outcome.raw_rows or ()
    if len(rows) <= max_rows:
        return repr([list(r) for r in rows])
    shown = repr([list(r) for r in rows[:max_rows]])
    return f"{shown} ... ({len(rows)} rows total)"

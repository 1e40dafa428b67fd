"""Find the tables a query touches and assemble the schema shown to a judge.

The union schema for a pairwise comparison is the DDL of every table either
candidate references, in catalog order.  Extraction is token-based: it walks
FROM/JOIN items (including subqueries and CTE bodies), drops CTE aliases, and
keeps only names that exist in the snapshot.  If either side fails to parse,
the whole snapshot is used instead; a judge always receives some schema.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ingest import SchemaSnapshot


class TableExtractionError(ValueError):
    """The query could not be scanned for table references."""


@dataclass(frozen=True)
class SchemaUnion:
    db_id: str
    table_names: tuple[str, ...]
    ddl_text: str
    fallback_used: bool = False


_TOKEN_RE = re.compile(
    r"""
    \s+
  | --[^\n]*
  | /\*
  | '(?:[^']|'')*'
  | "(?:[^"]|"")*"
  | `(?:[^`]|``)*`
  | \[[^\]]*\]
  | [A-Za-z_][A-Za-z0-9_$]*
  | \d+(?:\.\d+)?(?:[eE][+-]?\d+)?
  | .
    """,
    re.VERBOSE | re.DOTALL,
)

# Tokens that can never start a table item after FROM/JOIN or a comma.
_CLAUSE_KEYWORDS = frozenset(
    """
    where group order limit having on using select set and or not as join
    inner left right full outer cross natural union except intersect with
    values when then else end case
    """.split()
)


def _tokenize(sql: str) -> list[str]:
    """Split into tokens; strings/comments removed, quoted idents unwrapped."""
    tokens: list[str] = []
    pos = 0
    n = len(sql)
    while pos < n:
        match = _TOKEN_RE.match(sql, pos)
        if match is None:  # pragma: no cover - the grammar has a catch-all
            raise TableExtractionError(f"unrecognized input at offset {pos}")
        text = match.group(0)
        pos = match.end()
        if text.isspace() or text.startswith("--"):
            continue
        if text == "/*":
            end = sql.find("*/", pos)
            if end < 0:
                raise TableExtractionError("unterminated block comment")
            pos = end + 2
            continue
        if text.startswith("'"):
            if len(text) < 2 or not text.endswith("'"):
                raise TableExtractionError("unterminated string literal")
            tokens.append("''")  # placeholder; literals never name tables
            continue
        if text[0] in '"`[':
            closer = {'"': '"', "`": "`", "[": "]"}[text[0]]
            if len(text) < 2 or not text.endswith(closer):
                raise TableExtractionError("unterminated quoted identifier")
            inner = text[1:-1]
            if text[0] == '"':
                inner = inner.replace('""', '"')
            elif text[0] == "`":
                inner = inner.replace("``", "`")
            tokens.append("\x00" + inner)  # \x00 marks a quoted identifier
            continue
        tokens.append(text)
    return tokens


def _is_ident(token: str) -> bool:
    if token.startswith("\x00"):
        return True
    return bool(re.fullmatch(r"[A-Za-z_][A-Za-z0-9_$]*", token))


def _ident_name(token: str) -> str:
    return token[1:] if token.startswith("\x00") else token


def _is_plain_keyword(token: str, word: str) -> bool:
    return not token.startswith("\x00") and token.lower() == word


def _match_parens(tokens: list[str]) -> dict[int, int]:
    pairs: dict[int, int] = {}
    stack: list[int] = []
    for i, tok in enumerate(tokens):
        if tok == "(":
            stack.append(i)
        elif tok == ")":
            if not stack:
                raise TableExtractionError("unbalanced parentheses")
            pairs[stack.pop()] = i
    if stack:
        raise TableExtractionError("unbalanced parentheses")
    return pairs


def _cte_aliases(tokens: list[str]) -> set[str]:
    """Names defined as `<ident> [ (cols) ] AS (`: CTEs, never base tables."""
    aliases: set[str] = set()
    pairs = _match_parens(tokens)
    for i, tok in enumerate(tokens):
        if not _is_ident(tok) or _is_plain_keyword(tok, "as"):
            continue
        j = i + 1
        if j < len(tokens) and tokens[j] == "(":
            j = pairs[j] + 1  # skip the column list
        if (
            j + 1 < len(tokens)
            and _is_plain_keyword(tokens[j], "as")
            and tokens[j + 1] == "("
        ):
            aliases.add(_ident_name(tok).lower())
    return aliases


def _scan_table_items(tokens: list[str], start: int, pairs: dict[int, int], found: list[str]) -> None:
    """Collect table names in the item list beginning at ``start``.

    ``start`` points just past a FROM or JOIN keyword.  Comma-separated items
    are followed; parenthesized items (subqueries, nested joins) are stepped
    over here because the caller's linear pass visits their insides anyway.
    """
    j = start
    n = len(tokens)
    first = True
    while True:
        if j >= n:
            if first:
                raise TableExtractionError("dangling FROM/JOIN")
            return
        tok = tokens[j]
        if tok == "(":
            j = pairs[j] + 1
        elif _is_ident(tok) and (tok.startswith("\x00") or tok.lower() not in _CLAUSE_KEYWORDS):
            name = _ident_name(tok)
            j += 1
            while j + 1 < n and tokens[j] == "." and _is_ident(tokens[j + 1]):
                name = _ident_name(tokens[j + 1])  # keep last part of a dotted chain
                j += 2
            if j < n and tokens[j] == "(":
                j = pairs[j] + 1  # table-valued function, not a base table
            else:
                found.append(name)
        else:
            if first:
                raise TableExtractionError(f"FROM/JOIN followed by {tok!r}")
            return
        first = False
        # optional alias: AS ident, or a bare identifier
        if j < n and _is_plain_keyword(tokens[j], "as") and j + 1 < n and _is_ident(tokens[j + 1]):
            j += 2
        elif j < n and _is_ident(tokens[j]) and (
            tokens[j].startswith("\x00") or tokens[j].lower() not in _CLAUSE_KEYWORDS
        ):
            j += 1
        if j < n and tokens[j] == ",":
            j += 1
            first = False
            continue
        return


def extract_referenced_tables(sql: str, snapshot: SchemaSnapshot) -> set[str]:
    """Tables from FROM/JOIN positions anywhere in the statement.

    Names are matched case-insensitively against the snapshot and returned
    with the snapshot's casing; CTE aliases and names unknown to the
    snapshot are dropped.  Raises TableExtractionError when the statement
    cannot be scanned.
    """
    tokens = _tokenize(sql)
    pairs = _match_parens(tokens)
    ctes = _cte_aliases(tokens)
    found: list[str] = []
    for i, tok in enumerate(tokens):
        if _is_plain_keyword(tok, "from") or _is_plain_keyword(tok, "join"):
            _scan_table_items(tokens, i + 1, pairs, found)
    by_lower = {t.name.lower(): t.name for t in snapshot.tables}
    return {
        by_lower[name.lower()]
        for name in found
        if name.lower() in by_lower and name.lower() not in ctes
    }


def build_union_schema(snapshot: SchemaSnapshot, sql_a: str, sql_b: str) -> SchemaUnion:
    """Union of both candidates' referenced tables, as DDL text.

    Parse failure on either side degrades to the full snapshot rather than
    erroring; ``fallback_used`` records that it happened.
    """
    fallback = False
    names: set[str] = set()
    for sql in (sql_a, sql_b):
        try:
            names |= extract_referenced_tables(sql, snapshot)
        except TableExtractionError:
            fallback = True
            break
    if fallback:
        ordered = tuple(t.name for t in snapshot.tables)
    else:
        ordered = tuple(t.name for t in snapshot.tables if t.name in names)
    ddl = "\n\n".join(f"{t.ddl};" for t in snapshot.tables if t.name in ordered)
    return SchemaUnion(
        db_id=snapshot.db_id,
        table_names=ordered,
        ddl_text=ddl,
        fallback_used=fallback,
    )

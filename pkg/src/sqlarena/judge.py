"""Pairwise SQL judging: prompt rendering, response parsing, and backends.

A judgment compares two candidate SQLs (with their execution results) for one
question and names a winner.  Backends share one interface:

* ``RemoteJudge``   -- chat-completion HTTP endpoint, temperature 0.
* ``OracleJudge``   -- gold-aware; the side matching the gold result wins.
* ``NoisyOracleJudge`` -- oracle answer kept with probability ``accuracy``.
* ``CachedJudge``   -- content-addressed response store wrapping any backend.

Randomness (oracle coin flips, noise) is drawn from per-request hash streams,
so outcomes do not depend on call order or thread interleaving.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Literal, Mapping, NamedTuple, Optional, Protocol, Union

import requests

from .execution import ExecutionOutcome, render_result, results_equivalent
from .ingest import Question
from .schema_link import SchemaUnion

logger = logging.getLogger(__name__)

TOKEN_ENV_VAR = "JUDGE_API_TOKEN"

TemplateName = Literal["pjudge", "rjudge"]

WINNER_A = "A"
WINNER_B = "B"
PARSE_FAILURE = "parse_failure"


class JudgeConfigError(ValueError):
    """The backend is missing something it needs (gold results, outcomes)."""


class JudgeTransportError(RuntimeError):
    """The remote endpoint could not produce a response; not a parse failure."""


_HEADER = """You first thinks about the reasoning process in the mind and then provides the user with the answer.

Task Overview:
You are a data science expert. Below, you are provided with a database schema, a natural language question, two candidates SQL and its corresponding execution result. Your task is to understand the schema and choose the correct SQL which answers the natural language question from the two candidates.

Database Engine:
SQLite

Database Schema:
{DATABASE_SCHEMA}

This schema describes the database's structure, including tables, columns, primary keys, foreign keys, and any relevant relationships or constraints.

Question:
{QUESTION_BLOCK}

Here are two candidate SQLs and their execute results:
"""

_OUTPUT_FORMAT = """Output Format:
Show your work in <think> </think> tags. And return your answer 'A' or 'B' in <answer> </answer> tags. For example, <think>reasoning process here</think><answer>A</answer> if the candidate A is correct, <think>reasoning process here</think><answer>B</answer> if the candidate B is correct."""

PJUDGE_TEMPLATE = (
    _HEADER
    + """Candidate A:
{CANDIDATE_A_QUERY}
Execution result of A:
{CANDIDATE_A_RESULT}

Candidate B:
{CANDIDATE_B_QUERY}
Execution result of B:
{CANDIDATE_B_RESULT}

Instructions:
- Before choosing the final answer, please think through the steps of how to confirm its correctness. You should think through these steps:
1. Understanding the user question requirements:  – What information is being requested? What are the key columns and filters?
2. Analyzing the Database schema: – Which tables and joins are necessary to answer the question? What are the key relationships?
3. Evaluating candidate A and its execution results: – Does it select the correct columns? Does it apply the correct conditions and joins? Does the result match expectations?
4. Evaluating candidate B and its execution results: – Does it select the correct columns? Does it apply the correct conditions and joins? Does the result match expectations?
5. Comparing two candidates and their execution results: -– Identify differences between the two queries in terms of structure, logic, and execution result.
6. Determining the Correct answer: – Select the query that best satisfies the question requirements, with correct columns, filters, and joins.

Remember:
- The correct SQL should return all of the information asked in the question without any missing or extra information. If the question asks for a specific column, the correct candidate SQL only include that column in the SELECT clause, nothing more, nothing less.
- The empty execution result "[]" does not necessarily mean that the SQL query is incorrect; it might simply indicate that the database does not contain such data.

"""
    + _OUTPUT_FORMAT
)

RJUDGE_TEMPLATE = (
    _HEADER
    + """Candidate A:
{CANDIDATE_A_QUERY}
Execution result:
{CANDIDATE_A_RESULT}

Candidate B:
{CANDIDATE_B_QUERY}
Execution result:
{CANDIDATE_B_RESULT}

Instructions:
- The correct SQL should return all of the information asked in the question without any missing or extra information. If the question asks for a specific column, the correct candidate SQL only include that column in the SELECT clause, nothing more.
- The empty execution result "[]" does not necessarily mean that the SQL query is incorrect; it might simply indicate that the database does not contain such data.
- Before choosing the final answer, please think through the steps of how to confirm its correctness.

"""
    + _OUTPUT_FORMAT
)

TEMPLATES: dict[str, str] = {"pjudge": PJUDGE_TEMPLATE, "rjudge": RJUDGE_TEMPLATE}


@dataclass(frozen=True)
class JudgmentSide:
    """One candidate as the judge sees it: SQL plus its rendered result."""

    sql: str
    result_text: str
    outcome: Optional[ExecutionOutcome] = None


@dataclass(frozen=True)
class JudgmentRequest:
    question: Question
    schema_union: SchemaUnion
    side_a: JudgmentSide
    side_b: JudgmentSide
    template: TemplateName = "rjudge"


@dataclass(frozen=True)
class JudgmentOutcome:
    winner: str  # WINNER_A, WINNER_B, or PARSE_FAILURE
    raw_response: str
    format_ok: bool
    reasoning_text: Optional[str] = None
    latency_ms: float = 0.0
    backend_tag: str = ""


def make_request(
    question: Question,
    schema_union: SchemaUnion,
    sql_a: str,
    outcome_a: ExecutionOutcome,
    sql_b: str,
    outcome_b: ExecutionOutcome,
    template: TemplateName = "rjudge",
) -> JudgmentRequest:
    """Build a request from raw execution outcomes, rendering result texts."""
    return JudgmentRequest(
        question=question,
        schema_union=schema_union,
        side_a=JudgmentSide(sql=sql_a, result_text=render_result(outcome_a), outcome=outcome_a),
        side_b=JudgmentSide(sql=sql_b, result_text=render_result(outcome_b), outcome=outcome_b),
        template=template,
    )


def render_prompt(req: JudgmentRequest) -> str:
    """Fill the template slots; deterministic for a given request."""
    template = TEMPLATES.get(req.template)
    if template is None:
        raise JudgeConfigError(f"unknown template {req.template!r}")
    evidence = req.question.evidence or ""
    if evidence:
        question_block = f"{evidence}\n{req.question.text}"
    else:
        question_block = req.question.text
    return template.format(
        DATABASE_SCHEMA=req.schema_union.ddl_text,
        QUESTION_BLOCK=question_block,
        CANDIDATE_A_QUERY=req.side_a.sql,
        CANDIDATE_A_RESULT=req.side_a.result_text,
        CANDIDATE_B_QUERY=req.side_b.sql,
        CANDIDATE_B_RESULT=req.side_b.result_text,
    )


def swap_sides(req: JudgmentRequest) -> JudgmentRequest:
    return replace(req, side_a=req.side_b, side_b=req.side_a)


_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
# Anchored shape check: think span, then answer span holding a bare A/B.
_FORMAT_RE = re.compile(
    r"\s*<think>.*?</think>\s*<answer>\s*[ABab]\s*</answer>\s*\Z", re.DOTALL
)


class ParsedJudgment(NamedTuple):
    winner: str
    reasoning_text: Optional[str]
    format_ok: bool


def parse_judgment(raw: str) -> ParsedJudgment:
    """Read the verdict out of a raw response.

    The winner is the content of the last answer span, trimmed and
    uppercased; anything other than exactly "A" or "B" is a parse failure.
    ``format_ok`` additionally demands the whole string be one think span
    followed by one answer span, so it implies a valid winner.
    """
    answers = _ANSWER_RE.findall(raw)
    if not answers:
        winner = PARSE_FAILURE
    else:
        label = answers[-1].strip().upper()
        winner = label if label in (WINNER_A, WINNER_B) else PARSE_FAILURE
    thinks = _THINK_RE.findall(raw)
    reasoning = thinks[-1] if thinks else None
    format_ok = _FORMAT_RE.match(raw) is not None
    return ParsedJudgment(winner, reasoning, format_ok)


def _flip(winner: str) -> str:
    if winner == WINNER_A:
        return WINNER_B
    if winner == WINNER_B:
        return WINNER_A
    return winner


def _unit_uniform(namespace: str, seed: int, *parts: str) -> float:
    """Uniform [0,1) keyed by (namespace, seed, parts); stateless."""
    payload = "\x1f".join((namespace, str(seed), *parts)).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big") / 2.0**64


def _synthetic_response(winner: str, note: str) -> str:
    return f"<think>{note}</think><answer>{winner}</answer>"


class JudgeBackend(Protocol):
    tag: str

    def judge(self, req: JudgmentRequest) -> JudgmentOutcome: ...


def judge_pair(backend: JudgeBackend, req: JudgmentRequest) -> JudgmentOutcome:
    return backend.judge(req)


GoldLookup = Union[Mapping[str, ExecutionOutcome], Callable[[str], Optional[ExecutionOutcome]]]


class OracleJudge:
    """Names the side whose result matches gold; seeded coin when undecidable."""

    tag = "oracle"

    def __init__(self, gold: GoldLookup, seed: int = 0):
        self._gold = gold
        self.seed = seed
        self.call_count = 0

    def _gold_outcome(self, question_id: str) -> Optional[ExecutionOutcome]:
        if callable(self._gold):
            return self._gold(question_id)
        return self._gold.get(question_id)

    def judge(self, req: JudgmentRequest) -> JudgmentOutcome:
        self.call_count += 1
        gold = self._gold_outcome(req.question.id)
        if gold is None:
            raise JudgeConfigError(
                f"oracle backend has no gold result for question {req.question.id!r}"
            )
        if req.side_a.outcome is None or req.side_b.outcome is None:
            raise JudgeConfigError("oracle backend needs execution outcomes on both sides")
        a_gold = results_equivalent(req.side_a.outcome, gold)
        b_gold = results_equivalent(req.side_b.outcome, gold)
        if a_gold != b_gold:
            winner = WINNER_A if a_gold else WINNER_B
            note = f"gold matches candidate {winner}"
        else:
            u = _unit_uniform(
                "oracle-coin", self.seed, req.question.id, req.side_a.sql, req.side_b.sql
            )
            winner = WINNER_A if u < 0.5 else WINNER_B
            note = "neither side decidable against gold; seeded coin"
            logger.debug("oracle coin flip for question %s -> %s", req.question.id, winner)
        raw = _synthetic_response(winner, note)
        return JudgmentOutcome(
            winner=winner,
            raw_response=raw,
            format_ok=True,
            reasoning_text=note,
            backend_tag=self.tag,
        )


class NoisyOracleJudge:
    """Oracle whose answer is kept with probability ``accuracy``, else flipped."""

    def __init__(self, gold: GoldLookup, accuracy: float, seed: int = 0):
        if not 0.0 <= accuracy <= 1.0:
            raise JudgeConfigError(f"accuracy must be in [0, 1], got {accuracy}")
        self._oracle = OracleJudge(gold, seed=seed)
        self.accuracy = accuracy
        self.seed = seed
        self.call_count = 0
        self.tag = f"noisy_oracle(p={accuracy:g})"

    def judge(self, req: JudgmentRequest) -> JudgmentOutcome:
        self.call_count += 1
        base = self._oracle.judge(req)
        u = _unit_uniform("noise", self.seed, req.question.id, req.side_a.sql, req.side_b.sql)
        if u < self.accuracy:
            return replace(base, backend_tag=self.tag)
        winner = _flip(base.winner)
        note = "noise flipped the oracle answer"
        return JudgmentOutcome(
            winner=winner,
            raw_response=_synthetic_response(winner, note),
            format_ok=True,
            reasoning_text=note,
            backend_tag=self.tag,
        )


_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class RemoteJudge:
    """Chat-completion endpoint speaking the plain POST /chat/completions shape.

    temperature is pinned to 0 and a single completion is requested; the only
    tunables are the endpoint, model name, token budget, and retry policy.
    Auth comes from the JUDGE_API_TOKEN environment variable when present.
    """

    tag = "remote"

    def __init__(
        self,
        base_url: str,
        model: str,
        max_tokens: int = 4096,
        retry_count: int = 3,
        request_timeout_s: float = 120.0,
        backoff_s: float = 0.5,
        session: Optional[requests.Session] = None,
    ):
        if not base_url:
            raise JudgeConfigError("remote judge requires a base URL")
        self.url = base_url.rstrip("/") + "/chat/completions"
        self.model = model
        self.max_tokens = max_tokens
        self.retry_count = retry_count
        self.request_timeout_s = request_timeout_s
        self.backoff_s = backoff_s
        self._session = session or requests.Session()
        self.call_count = 0

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _post_with_retries(self, body: dict) -> str:
        last_error: Optional[str] = None
        for attempt in range(self.retry_count + 1):
            if attempt and self.backoff_s:
                time.sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(
                    self.url, json=body, headers=self._headers(), timeout=self.request_timeout_s
                )
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                logger.warning("judge request attempt %d failed: %s", attempt + 1, exc)
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = f"HTTP {resp.status_code}"
                logger.warning("judge request attempt %d got %s", attempt + 1, last_error)
                continue
            if resp.status_code != 200:
                raise JudgeTransportError(f"judge endpoint returned HTTP {resp.status_code}")
            try:
                data = resp.json()
                content = data["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise JudgeTransportError(f"malformed judge response: {exc}") from exc
            if not isinstance(content, str):
                raise JudgeTransportError("judge response content is not text")
            return content
        raise JudgeTransportError(
            f"judge endpoint unreachable after {self.retry_count + 1} attempts ({last_error})"
        )

    def judge(self, req: JudgmentRequest) -> JudgmentOutcome:
        self.call_count += 1
        prompt = render_prompt(req)
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
            "max_tokens": self.max_tokens,
        }
        start = time.monotonic()
        raw = self._post_with_retries(body)
        latency_ms = (time.monotonic() - start) * 1000.0
        parsed = parse_judgment(raw)
        return JudgmentOutcome(
            winner=parsed.winner,
            raw_response=raw,
            format_ok=parsed.format_ok,
            reasoning_text=parsed.reasoning_text,
            latency_ms=latency_ms,
            backend_tag=self.tag,
        )


class CachedJudge:
    """Wraps a backend with a directory of raw responses keyed by content hash.

    The key covers the template id and the fully rendered prompt, so any
    change to question, schema, SQL, or results misses.  Writes go through a
    temp file and rename, which keeps concurrent writers safe; both would
    write identical bytes anyway.
    """

    def __init__(self, inner: JudgeBackend, cache_dir: Union[str, Path]):
        self.inner = inner
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.tag = f"cached({inner.tag})"
        self.hits = 0
        self.misses = 0

    def _key(self, req: JudgmentRequest) -> str:
        payload = f"{req.template}\x1f{render_prompt(req)}".encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    def _path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.json"

    def judge(self, req: JudgmentRequest) -> JudgmentOutcome:
        key = self._key(req)
        path = self._path(key)
        if path.exists():
            self.hits += 1
            raw = json.loads(path.read_text(encoding="utf-8"))["raw_response"]
            parsed = parse_judgment(raw)
            return JudgmentOutcome(
                winner=parsed.winner,
                raw_response=raw,
                format_ok=parsed.format_ok,
                reasoning_text=parsed.reasoning_text,
                backend_tag=self.tag,
            )
        self.misses += 1
        outcome = self.inner.judge(req)
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump({"raw_response": outcome.raw_response}, fh)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return replace(outcome, backend_tag=self.tag)

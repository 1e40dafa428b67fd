"""Selection strategies over execution-consistent clusters.

Four ways to pick one SQL out of a candidate pool:

* ``sc``  -- majority vote by cluster size, no judge.
* ``ct``  -- double round-robin between cluster proxies, unweighted scores.
* ``wct`` -- same round-robin, scores multiplied by cluster size.
* ``drt`` -- double round-robin between every executable candidate.

Every ordered pair is judged exactly once: the winner of a judgment earns one
point, whichever side it sat on.  Cluster tournaments therefore issue K(K-1)
judgments and the candidate-level one M(M-1).  Scoring is a fold over the
completed trace, so issue order never affects the result.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from .clustering import ConsistentCluster, ProxyPolicy, cluster_candidates
from .execution import ExecutionOutcome
from .ingest import CandidatePool, Question, SchemaSnapshot
from .judge import (
    PARSE_FAILURE,
    WINNER_A,
    WINNER_B,
    JudgeBackend,
    JudgmentOutcome,
    JudgmentRequest,
    TemplateName,
    judge_pair,
    make_request,
)
from .schema_link import build_union_schema

logger = logging.getLogger(__name__)

Strategy = Literal["sc", "ct", "drt", "wct"]
ParseFailurePolicy = Literal["strict", "abstain"]

STRATEGIES: tuple[str, ...] = ("sc", "ct", "drt", "wct")


@dataclass(frozen=True)
class ComparisonRecord:
    """One judged ordered pair; indices are cluster or candidate ids."""

    a_index: int
    b_index: int
    request: JudgmentRequest
    outcome: JudgmentOutcome


@dataclass(frozen=True)
class TournamentResult:
    strategy: str
    scores: tuple[int, ...]
    weighted_scores: tuple[int, ...]
    winner_cluster: int
    selected_sql: str
    selected_candidate_index: int
    judgment_count: int
    trace: tuple[ComparisonRecord, ...]
    tie_broken: bool = False
    unexecutable_fallback: bool = False


def resolve_parse_failure(
    policy: ParseFailurePolicy, pair: tuple[int, int], outcome: JudgmentOutcome
) -> Optional[int]:
    """Index gaining the point for an unparseable judgment, or None.

    strict: a non-win of side A is a win of side B, mirroring the scoring
    loop's else branch.  abstain: nobody scores; the failure stays visible
    in the trace.
    """
    if outcome.winner != PARSE_FAILURE:
        raise ValueError("resolve_parse_failure applies only to parse failures")
    if policy == "strict":
        return pair[1]
    if policy == "abstain":
        return None
    raise ValueError(f"unknown parse-failure policy {policy!r}")


def _fold_scores(
    ids: Sequence[int], trace: Sequence[ComparisonRecord], policy: ParseFailurePolicy
) -> dict[int, int]:
    """Points per player id, folded from the trace in recorded order."""
    scores = {i: 0 for i in ids}
    for rec in trace:
        winner = rec.outcome.winner
        if winner == WINNER_A:
            scores[rec.a_index] += 1
        elif winner == WINNER_B:
            scores[rec.b_index] += 1
        else:
            gainer = resolve_parse_failure(policy, (rec.a_index, rec.b_index), rec.outcome)
            if gainer is not None:
                scores[gainer] += 1
    return scores


def _pick(
    primary: dict[int, int], secondary: Optional[dict[int, int]], ids: Sequence[int]
) -> tuple[int, bool]:
    """argmax of primary over ids; ties go to max secondary, then lowest id."""
    best = max(primary[i] for i in ids)
    tied = [i for i in ids if primary[i] == best]
    tie_broken = len(tied) > 1
    if tie_broken and secondary is not None:
        best2 = max(secondary[i] for i in tied)
        tied = [i for i in tied if secondary[i] == best2]
    return min(tied), tie_broken


def run_sc(clusters: Sequence[ConsistentCluster], pool: Optional[CandidatePool] = None) -> TournamentResult:
    """Majority vote: the largest cluster wins, no judgments spent."""
    if not clusters:
        raise ValueError("run_sc needs at least one cluster")
    ids = [c.cluster_index for c in clusters]
    sizes = {c.cluster_index: c.cardinality for c in clusters}
    winner, tie_broken = _pick(sizes, None, ids)
    chosen = next(c for c in clusters if c.cluster_index == winner)
    ordered = tuple(sizes[i] for i in sorted(ids))
    return TournamentResult(
        strategy="sc",
        scores=ordered,
        weighted_scores=ordered,
        winner_cluster=chosen.cluster_index,
        selected_sql=pool.candidates[chosen.proxy_index].sql if pool else "",
        selected_candidate_index=chosen.proxy_index,
        judgment_count=0,
        trace=(),
        tie_broken=tie_broken,
    )


def _judge_round_robin(
    question: Question,
    snapshot: SchemaSnapshot,
    judge: JudgeBackend,
    players: Sequence[tuple[int, str, ExecutionOutcome]],
    template: TemplateName,
) -> list[ComparisonRecord]:
    """Judge every ordered pair of players, in (row, column) order."""
    records: list[ComparisonRecord] = []
    for k_id, k_sql, k_out in players:
        for j_id, j_sql, j_out in players:
            if j_id == k_id:
                continue
            union = build_union_schema(snapshot, k_sql, j_sql)
            req = make_request(question, union, k_sql, k_out, j_sql, j_out, template)
            outcome = judge_pair(judge, req)
            records.append(ComparisonRecord(k_id, j_id, req, outcome))
    return records


def _cluster_tournament(
    strategy: str,
    question: Question,
    clusters: Sequence[ConsistentCluster],
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    judge: JudgeBackend,
    snapshot: SchemaSnapshot,
    template: TemplateName,
    policy: ParseFailurePolicy,
    weighted: bool,
) -> TournamentResult:
    if not clusters:
        raise ValueError(f"run_{strategy} needs at least one cluster")
    players = [
        (c.cluster_index, pool.candidates[c.proxy_index].sql, outcomes[c.proxy_index])
        for c in clusters
    ]
    ids = [c.cluster_index for c in clusters]
    sizes = {c.cluster_index: c.cardinality for c in clusters}
    trace = _judge_round_robin(question, snapshot, judge, players, template) if len(players) > 1 else []
    scores = _fold_scores(ids, trace, policy)
    weighted_scores = {i: sizes[i] * scores[i] for i in ids} if weighted else dict(scores)
    winner, tie_broken = _pick(weighted_scores if weighted else scores, sizes, ids)
    chosen = next(c for c in clusters if c.cluster_index == winner)
    order = sorted(ids)
    return TournamentResult(
        strategy=strategy,
        scores=tuple(scores[i] for i in order),
        weighted_scores=tuple(weighted_scores[i] for i in order),
        winner_cluster=chosen.cluster_index,
        selected_sql=pool.candidates[chosen.proxy_index].sql,
        selected_candidate_index=chosen.proxy_index,
        judgment_count=len(trace),
        trace=tuple(trace),
        tie_broken=tie_broken,
    )


def run_ct(
    question: Question,
    clusters: Sequence[ConsistentCluster],
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    judge: JudgeBackend,
    snapshot: SchemaSnapshot,
    template: TemplateName = "rjudge",
    policy: ParseFailurePolicy = "strict",
) -> TournamentResult:
    """Unweighted cluster round-robin; exactly K(K-1) judgments."""
    return _cluster_tournament(
        "ct", question, clusters, pool, outcomes, judge, snapshot, template, policy, weighted=False
    )


def run_wct(
    question: Question,
    clusters: Sequence[ConsistentCluster],
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    judge: JudgeBackend,
    snapshot: SchemaSnapshot,
    template: TemplateName = "rjudge",
    policy: ParseFailurePolicy = "strict",
) -> TournamentResult:
    """Cluster round-robin with size weighting: S_w[k] = |C_k| * S[k]."""
    return _cluster_tournament(
        "wct", question, clusters, pool, outcomes, judge, snapshot, template, policy, weighted=True
    )


def run_drt(
    question: Question,
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    judge: JudgeBackend,
    snapshot: SchemaSnapshot,
    template: TemplateName = "rjudge",
    policy: ParseFailurePolicy = "strict",
    clusters: Optional[Sequence[ConsistentCluster]] = None,
) -> TournamentResult:
    """Round-robin over all executable candidates; M(M-1) judgments.

    Duplicated SQL texts still compete against each other.  Scores are
    reported per pool position (non-executable candidates stay 0) and the
    winner's cluster is attached for comparability with the cluster runs.
    """
    executable = [i for i, out in enumerate(outcomes) if out.ok]
    if not executable:
        raise ValueError("run_drt needs at least one executable candidate")
    players = [(i, pool.candidates[i].sql, outcomes[i]) for i in executable]
    trace = _judge_round_robin(question, snapshot, judge, players, template) if len(players) > 1 else []
    scores = _fold_scores(executable, trace, policy)
    winner, tie_broken = _pick(scores, None, executable)
    if clusters is None:
        clusters = cluster_candidates(pool, outcomes).clusters
    winner_cluster = next(
        (c.cluster_index for c in clusters if winner in c.member_indices), -1
    )
    dense = tuple(scores.get(i, 0) for i in range(len(outcomes)))
    return TournamentResult(
        strategy="drt",
        scores=dense,
        weighted_scores=dense,
        winner_cluster=winner_cluster,
        selected_sql=pool.candidates[winner].sql,
        selected_candidate_index=winner,
        judgment_count=len(trace),
        trace=tuple(trace),
        tie_broken=tie_broken,
    )


def select(
    question: Question,
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    strategy: Strategy,
    judge: Optional[JudgeBackend] = None,
    snapshot: Optional[SchemaSnapshot] = None,
    template: TemplateName = "rjudge",
    policy: ParseFailurePolicy = "strict",
    proxy_policy: ProxyPolicy = "first_index",
    proxy_seed: Optional[int] = None,
) -> TournamentResult:
    """Cluster the pool, then run one strategy over it.

    When nothing executes, candidate 0 is returned with
    ``unexecutable_fallback`` set and ``winner_cluster`` -1.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not pool.candidates:
        raise ValueError(f"empty candidate pool for question {question.id!r}")
    clustering = cluster_candidates(pool, outcomes, proxy_policy, proxy_seed)
    clusters = clustering.clusters
    if not clusters:
        logger.info("question %s: no executable candidate, falling back to candidate 0", question.id)
        return TournamentResult(
            strategy=strategy,
            scores=(),
            weighted_scores=(),
            winner_cluster=-1,
            selected_sql=pool.candidates[0].sql,
            selected_candidate_index=0,
            judgment_count=0,
            trace=(),
            unexecutable_fallback=True,
        )
    if strategy == "sc":
        return run_sc(clusters, pool)
    if judge is None or snapshot is None:
        raise ValueError(f"strategy {strategy!r} needs a judge backend and a schema snapshot")
    if strategy == "ct":
        return run_ct(question, clusters, pool, outcomes, judge, snapshot, template, policy)
    if strategy == "wct":
        return run_wct(question, clusters, pool, outcomes, judge, snapshot, template, policy)
    return run_drt(question, pool, outcomes, judge, snapshot, template, policy, clusters)


def serialize_result(question_id: str, result: TournamentResult) -> dict:
    """Stable JSON form of a tournament; latency and prompts are left out."""
    return {
        "question_id": question_id,
        "strategy": result.strategy,
        "scores": list(result.scores),
        "weighted_scores": list(result.weighted_scores),
        "winner_cluster": result.winner_cluster,
        "selected_candidate_index": result.selected_candidate_index,
        "selected_sql": result.selected_sql,
        "judgment_count": result.judgment_count,
        "tie_broken": result.tie_broken,
        "unexecutable_fallback": result.unexecutable_fallback,
        "trace": [
            {
                "pair": [rec.a_index, rec.b_index],
                "winner": rec.outcome.winner,
                "format_ok": rec.outcome.format_ok,
            }
            for rec in result.trace
        ],
    }

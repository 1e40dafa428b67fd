"""Aggregate selections into EX/SA metrics, reports, and simulations.

EX asks: did the selected SQL's result match gold?  SA asks: of the judged
pairs where exactly one side matched gold (the gold-decidable ones), how
often did the judge pick that side?  Both are percentages to two decimals.
The Monte Carlo simulation runs the real selection pipeline over synthetic
pools with a seeded noisy judge, as a desk-scale strategy comparison.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Union

from .execution import ExecutionOutcome, outcome_from_rows, results_equivalent
from .ingest import CandidatePool, CandidateSql, Question, SchemaSnapshot
from .judge import NoisyOracleJudge, WINNER_A, WINNER_B
from .tournament import TournamentResult, select, serialize_result

REPORT_SCHEMA_VERSION = 1
SIMULATION_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class QuestionEval:
    """Everything needed to score one question under one strategy."""

    question_id: str
    result: TournamentResult
    selected_outcome: ExecutionOutcome
    gold_outcome: Optional[ExecutionOutcome]
    difficulty: Optional[str] = None


@dataclass(frozen=True)
class EvalSummary:
    strategy: str
    ex_percent: Optional[float]
    sa_percent: Optional[float]
    avg_judgments: float
    question_count: int
    excluded_missing_gold: int
    per_difficulty: dict[str, float] = field(default_factory=dict)


def compute_ex(evals: Sequence[QuestionEval]) -> tuple[Optional[float], int]:
    """Percent of gold-bearing questions whose selection matches gold.

    Returns (percent or None, number excluded for missing gold).
    """
    scored = [e for e in evals if e.gold_outcome is not None]
    excluded = len(evals) - len(scored)
    if not scored:
        return None, excluded
    hits = sum(
        1 for e in scored if results_equivalent(e.selected_outcome, e.gold_outcome)
    )
    return round(100.0 * hits / len(scored), 2), excluded


def compute_sa(evals: Sequence[QuestionEval]) -> Optional[float]:
    """Percent of gold-decidable judgments the judge got right.

    A judgment is gold-decidable when exactly one side's execution outcome
    matches gold.  Parse failures on decidable judgments count against the
    judge.  No decidable judgments at all -> None, never 0.
    """
    decidable = 0
    correct = 0
    for ev in evals:
        if ev.gold_outcome is None:
            continue
        for rec in ev.result.trace:
            side_a = rec.request.side_a.outcome
            side_b = rec.request.side_b.outcome
            if side_a is None or side_b is None:
                continue
            a_gold = results_equivalent(side_a, ev.gold_outcome)
            b_gold = results_equivalent(side_b, ev.gold_outcome)
            if a_gold == b_gold:
                continue
            decidable += 1
            gold_side = WINNER_A if a_gold else WINNER_B
            if rec.outcome.winner == gold_side:
                correct += 1
    if decidable == 0:
        return None
    return round(100.0 * correct / decidable, 2)


def summarize(strategy: str, evals: Sequence[QuestionEval]) -> EvalSummary:
    ex, excluded = compute_ex(evals)
    sa = compute_sa(evals)
    avg = (
        round(sum(e.result.judgment_count for e in evals) / len(evals), 4)
        if evals
        else 0.0
    )
    per_difficulty: dict[str, float] = {}
    labelled = [e for e in evals if e.difficulty is not None and e.gold_outcome is not None]
    for diff in sorted({e.difficulty for e in labelled}):
        bucket = [e for e in labelled if e.difficulty == diff]
        hits = sum(1 for e in bucket if results_equivalent(e.selected_outcome, e.gold_outcome))
        per_difficulty[diff] = round(100.0 * hits / len(bucket), 2)
    return EvalSummary(
        strategy=strategy,
        ex_percent=ex,
        sa_percent=sa,
        avg_judgments=avg,
        question_count=len(evals),
        excluded_missing_gold=excluded,
        per_difficulty=per_difficulty,
    )


def emit_report(
    summaries: Sequence[EvalSummary],
    path: Union[str, Path],
    traces: Optional[Sequence[dict]] = None,
) -> None:
    """Write the JSON report; stable key order, no clocks, re-emit identical."""
    doc: dict = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "summaries": [],
    }
    for s in summaries:
        entry: dict = {
            "strategy": s.strategy,
            "ex_percent": s.ex_percent,
            "sa_percent": s.sa_percent,
            "avg_judgments": s.avg_judgments,
            "question_count": s.question_count,
            "excluded_missing_gold": s.excluded_missing_gold,
        }
        if s.per_difficulty:
            entry["per_difficulty"] = dict(sorted(s.per_difficulty.items()))
        doc["summaries"].append(entry)
    if traces is not None:
        doc["traces"] = list(traces)
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs for the synthetic pool generator.

    Pools model the regime size weighting is built for: when a pool carries
    a size signal at all, it points at gold (the gold cluster is strictly
    largest, by a margin); the remaining pools have equal-sized clusters,
    where weighting is neutral.  ``gold_largest_prob`` is the probability of
    the first kind of pool.
    """

    accuracies: tuple[float, ...] = (0.6, 0.8, 1.0)
    trials: int = 1000
    seed: int = 0
    strategies: tuple[str, ...] = ("sc", "ct", "wct")
    k_min: int = 2
    k_max: int = 6
    size_min: int = 1
    size_max: int = 4
    gold_margin_max: int = 2
    equal_size_max: int = 3
    gold_largest_prob: float = 0.6

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not all(0.0 <= p <= 1.0 for p in self.accuracies):
            raise ValueError("accuracies must lie in [0, 1]")
        if not 1 <= self.k_min <= self.k_max:
            raise ValueError("need 1 <= k_min <= k_max")
        if not 1 <= self.size_min <= self.size_max:
            raise ValueError("need 1 <= size_min <= size_max")
        if self.gold_margin_max < 1 or self.equal_size_max < 1:
            raise ValueError("gold_margin_max and equal_size_max must be >= 1")


class SimulationRow(NamedTuple):
    accuracy: float
    strategy: str
    trials: int
    seed: int
    mean_ex: float
    mean_judgments: float


_EMPTY_SNAPSHOT = SchemaSnapshot(db_id="synthetic", tables=())


def synthetic_pool(
    rng: random.Random, question_id: str, config: SimulationConfig
) -> tuple[Question, CandidatePool, list[ExecutionOutcome], ExecutionOutcome]:
    """One pool with K result-distinct clusters and a known gold cluster.

    Cluster k's members all return the single row (k,).  With probability
    ``gold_largest_prob`` the gold cluster is strictly largest by a margin;
    otherwise every cluster gets the same size.  Gold is never outsized by
    a wrong cluster, mirroring pools where frequency tracks correctness.
    """
    k = rng.randint(config.k_min, config.k_max)
    gold_index = rng.randrange(k)
    if rng.random() < config.gold_largest_prob and k > 1:
        sizes = [rng.randint(config.size_min, config.size_max) for _ in range(k)]
        others = [s for i, s in enumerate(sizes) if i != gold_index]
        sizes[gold_index] = max(others) + rng.randint(1, config.gold_margin_max)
    else:
        sizes = [rng.randint(1, config.equal_size_max)] * k
    candidates: list[CandidateSql] = []
    outcomes: list[ExecutionOutcome] = []
    for cluster_k, size in enumerate(sizes):
        for member in range(size):
            idx = len(candidates)
            candidates.append(
                CandidateSql(index=idx, sql=f"SELECT {cluster_k} AS v{member}")
            )
            outcomes.append(outcome_from_rows([(cluster_k,)]))
    question = Question(
        id=question_id, text="which value is right", evidence="", db_id="synthetic"
    )
    pool = CandidatePool(question_id=question_id, candidates=tuple(candidates))
    gold = outcome_from_rows([(gold_index,)])
    return question, pool, outcomes, gold


def simulate(config: SimulationConfig) -> list[SimulationRow]:
    """Run the real select() pipeline over seeded synthetic pools.

    Single-threaded on purpose: rows must come out byte-stable.  Pools are
    drawn once per trial and reused across every (accuracy, strategy) cell.
    """
    rng = random.Random(config.seed)
    trials = [
        synthetic_pool(rng, f"sim-{config.seed}-{t}", config)
        for t in range(config.trials)
    ]
    rows: list[SimulationRow] = []
    for p in config.accuracies:
        hits = {s: 0 for s in config.strategies}
        judgments = {s: 0 for s in config.strategies}
        for question, pool, outcomes, gold in trials:
            gold_map = {question.id: gold}
            judge = NoisyOracleJudge(gold_map, accuracy=p, seed=config.seed)
            for strategy in config.strategies:
                result = select(
                    question,
                    pool,
                    outcomes,
                    strategy,  # type: ignore[arg-type]
                    judge=judge,
                    snapshot=_EMPTY_SNAPSHOT,
                )
                judgments[strategy] += result.judgment_count
                picked = outcomes[result.selected_candidate_index]
                if results_equivalent(picked, gold):
                    hits[strategy] += 1
        for strategy in config.strategies:
            rows.append(
                SimulationRow(
                    accuracy=p,
                    strategy=strategy,
                    trials=config.trials,
                    seed=config.seed,
                    mean_ex=round(100.0 * hits[strategy] / config.trials, 4),
                    mean_judgments=round(judgments[strategy] / config.trials, 4),
                )
            )
    return rows


def write_simulation_csv(rows: Sequence[SimulationRow], path: Union[str, Path]) -> None:
    """Fixed-format CSV so identical rows serialize to identical bytes."""
    lines = ["schema_version,accuracy,strategy,trials,seed,mean_ex,mean_judgments"]
    for row in rows:
        lines.append(
            f"{SIMULATION_SCHEMA_VERSION},{row.accuracy:g},{row.strategy},"
            f"{row.trials},{row.seed},{row.mean_ex:.4f},{row.mean_judgments:.4f}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

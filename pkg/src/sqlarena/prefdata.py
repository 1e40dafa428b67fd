"""Preference-pair construction and the 0/1 verifiable reward.

A preference pair couples one gold-equivalent candidate (y_pos) with the
proxy of one wrong-result cluster (y_neg), carrying both execution results
and the union schema of the two queries.  Every pair is serialized twice,
once per slot ordering, so downstream training sees both positions.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence, Union

from .clustering import cluster_candidates
from .execution import ExecutionOutcome, render_result, results_equivalent
from .ingest import CandidatePool, Question, SchemaSnapshot
from .judge import parse_judgment
from .schema_link import build_union_schema

logger = logging.getLogger(__name__)

SKIP_GOLD_FAILED = "gold_execution_failed"
SKIP_NO_GOLD_CLUSTER = "no_gold_cluster"


class PreferencePairSkip(Exception):
    """The question contributes no pairs; carries the reason for the log."""

    def __init__(self, question_id: str, reason: str):
        super().__init__(f"question {question_id}: {reason}")
        self.question_id = question_id
        self.reason = reason


@dataclass(frozen=True)
class PreferencePair:
    question_id: str
    x: str
    d_uni_text: str
    y_pos: str
    y_neg: str
    e_pos: str
    e_neg: str
    label: str  # slot holding y_pos: "A" for order_id 0, "B" for its mirror
    order_id: int
    reasoning_trace: Optional[str] = None


class RewardInput(NamedTuple):
    output: str
    gold_label: str  # "A" or "B"


def question_context(question: Question) -> str:
    """Evidence line (when present) followed by the question text."""
    if question.evidence:
        return f"{question.evidence}\n{question.text}"
    return question.text


def build_preference_pairs(
    question: Question,
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    gold_outcome: Optional[ExecutionOutcome],
    snapshot: SchemaSnapshot,
) -> list[PreferencePair]:
    """Mirror-complete pairs for one question: 2 * min(|C_pos|, K-1) records.

    Positives are taken in member-index order, negative cluster proxies in
    cluster-index order.  Questions whose gold fails to execute, or where no
    cluster matches gold, raise PreferencePairSkip instead of silently
    producing nothing.
    """
    if gold_outcome is None or not gold_outcome.ok:
        raise PreferencePairSkip(question.id, SKIP_GOLD_FAILED)
    clustering = cluster_candidates(pool, outcomes)
    pos_cluster = None
    for cluster in clustering.clusters:
        if results_equivalent(cluster.representative_outcome, gold_outcome):
            pos_cluster = cluster
            break
    if pos_cluster is None:
        raise PreferencePairSkip(question.id, SKIP_NO_GOLD_CLUSTER)
    negatives = [c for c in clustering.clusters if c.cluster_index != pos_cluster.cluster_index]
    count = min(pos_cluster.cardinality, len(negatives))
    if count == 0:
        logger.debug("question %s: single cluster, no negatives", question.id)
        return []
    x = question_context(question)
    pairs: list[PreferencePair] = []
    positives = sorted(pos_cluster.member_indices)[:count]
    for pos_index, neg_cluster in zip(positives, negatives[:count]):
        y_pos = pool.candidates[pos_index].sql
        y_neg = pool.candidates[neg_cluster.proxy_index].sql
        e_pos = render_result(outcomes[pos_index])
        e_neg = render_result(outcomes[neg_cluster.proxy_index])
        d_uni = build_union_schema(snapshot, y_pos, y_neg).ddl_text
        common = dict(
            question_id=question.id,
            x=x,
            d_uni_text=d_uni,
            y_pos=y_pos,
            y_neg=y_neg,
            e_pos=e_pos,
            e_neg=e_neg,
        )
        pairs.append(PreferencePair(label="A", order_id=0, **common))
        pairs.append(PreferencePair(label="B", order_id=1, **common))
    return pairs


def evaluate_reward(output: str, gold_label: str) -> int:
    """1 iff the output passes the format check and names the gold label."""
    if gold_label not in ("A", "B"):
        raise ValueError(f"gold label must be A or B, got {gold_label!r}")
    parsed = parse_judgment(output)
    return 1 if parsed.format_ok and parsed.winner == gold_label else 0


def export_pairs(pairs: Sequence[PreferencePair], path: Union[str, Path]) -> int:
    """Write one JSON record per pair; returns the line count."""
    path = Path(path)
    written = 0
    with path.open("w", encoding="utf-8") as fh:
        for pair in pairs:
            record = asdict(pair)
            record["d_uni"] = record.pop("d_uni_text")
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            written += 1
    return written


def load_pairs(path: Union[str, Path]) -> list[PreferencePair]:
    """Inverse of export_pairs, for round-trip checks."""
    pairs: list[PreferencePair] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            record["d_uni_text"] = record.pop("d_uni")
            pairs.append(PreferencePair(**record))
    return pairs

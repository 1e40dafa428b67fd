"""Group candidates into execution-consistent clusters.

Two candidates land in the same cluster iff their execution results are
equivalent; errored or timed-out candidates form no cluster at all and are
reported as discarded.  Cluster order follows the first appearance of each
distinct result in the pool, which downstream tie-breaking relies on.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, replace
from typing import Literal, Sequence

from .execution import ExecutionOutcome
from .ingest import CandidatePool

ProxyPolicy = Literal["first_index", "seeded_random"]


@dataclass(frozen=True)
class ConsistentCluster:
    """One execution-consistent set: members share an equivalent result."""

    cluster_index: int
    member_indices: tuple[int, ...]
    proxy_index: int
    representative_outcome: ExecutionOutcome

    @property
    def cardinality(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class ClusteringOutput:
    clusters: tuple[ConsistentCluster, ...]
    discarded: tuple[int, ...]

    @property
    def executable_indices(self) -> tuple[int, ...]:
        return tuple(i for c in self.clusters for i in c.member_indices)


def select_proxy(
    member_indices: Sequence[int],
    policy: ProxyPolicy = "first_index",
    seed: int | None = None,
) -> int:
    """Pick the member that represents a cluster in the tournament.

    first_index is the deterministic default; seeded_random draws uniformly
    but demands a seed so reruns reproduce the same pick.
    """
    if not member_indices:
        raise ValueError("cluster has no members")
    if policy == "first_index":
        return min(member_indices)
    if policy == "seeded_random":
        if seed is None:
            raise ValueError("seeded_random proxy policy requires a seed")
        key = f"proxy|{seed}|{','.join(map(str, sorted(member_indices)))}"
        digest = hashlib.sha256(key.encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        return rng.choice(sorted(member_indices))
    raise ValueError(f"unknown proxy policy: {policy}")


def cluster_candidates(
    pool: CandidatePool,
    outcomes: Sequence[ExecutionOutcome],
    proxy_policy: ProxyPolicy = "first_index",
    proxy_seed: int | None = None,
) -> ClusteringOutput:
    """Partition the pool by execution-result equivalence.

    Clusters come back ordered by first-seen member; member indices ascend
    within each cluster.  Together with ``discarded`` they partition the
    candidate indices exactly.
    """
    if len(outcomes) != len(pool.candidates):
        raise ValueError(
            f"outcomes misaligned with pool: {len(outcomes)} outcomes for "
            f"{len(pool.candidates)} candidates"
        )
    groups: dict[str, list[int]] = {}
    reps: dict[str, ExecutionOutcome] = {}
    discarded: list[int] = []
    order: list[str] = []
    for index, outcome in enumerate(outcomes):
        if not outcome.ok:
            discarded.append(index)
            continue
        assert outcome.result is not None
        key = outcome.result.fingerprint
        if key in groups and not reps[key].result.same_form(outcome.result):
            # Fingerprint collision: fall back to full-form scan.
            key = _resolve_collision(groups, reps, outcome, key)
        if key not in groups:
            groups[key] = []
            reps[key] = outcome
            order.append(key)
        groups[key].append(index)

    clusters = []
    for k, key in enumerate(order):
        members = tuple(groups[key])
        clusters.append(
            ConsistentCluster(
                cluster_index=k,
                member_indices=members,
                proxy_index=select_proxy(members, proxy_policy, proxy_seed),
                representative_outcome=reps[key],
            )
        )
    return ClusteringOutput(clusters=tuple(clusters), discarded=tuple(discarded))


def _resolve_collision(groups, reps, outcome, colliding_key: str) -> str:
    for key, rep in reps.items():
        if rep.result.same_form(outcome.result):
            return key
    return colliding_key + f"#{len(groups)}"


def reproxy(output: ClusteringOutput, policy: ProxyPolicy, seed: int | None = None) -> ClusteringOutput:
    """Re-pick every cluster's proxy under a different policy."""
    clusters = tuple(
        replace(c, proxy_index=select_proxy(c.member_indices, policy, seed))
        for c in output.clusters
    )
    return ClusteringOutput(clusters=clusters, discarded=output.discarded)

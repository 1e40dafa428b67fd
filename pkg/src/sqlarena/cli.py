"""Command-line entry point.

Subcommands:

* ``select``    -- run selection strategies over a dataset + candidate pools.
* ``prefpairs`` -- export preference pairs (needs gold SQL, no judge).
* ``simulate``  -- Monte Carlo strategy comparison with a noisy judge.
* ``fixture``   -- write the bundled toy benchmark to a directory.

Failures exit nonzero after printing one machine-readable JSON error record
to stderr.  Every run directory receives the resolved config as
``config.json`` before any judge is contacted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .execution import ExecutionOutcome, NormalizationConfig, execute_pool, execute_sql, open_database
from .ingest import (
    CandidatePool,
    IngestError,
    Question,
    SchemaSnapshot,
    database_path,
    load_candidates,
    load_dataset,
    load_schema,
    validate_pools,
)
from .judge import (
    CachedJudge,
    JudgeBackend,
    JudgeConfigError,
    JudgeTransportError,
    NoisyOracleJudge,
    OracleJudge,
    RemoteJudge,
)
from .prefdata import PreferencePairSkip, build_preference_pairs, export_pairs
from .report import (
    QuestionEval,
    SimulationConfig,
    emit_report,
    simulate,
    summarize,
    write_simulation_csv,
)
from .toybench import build_toybench
from .tournament import STRATEGIES, select, serialize_result

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRANSPORT = 3


class CliError(Exception):
    """Configuration or input problem surfaced as an error record."""


def _error_record(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="question JSONL file")
    p.add_argument("--candidates", help="candidate-pool JSONL file")
    p.add_argument("--db-root", help="directory holding <db_id>/<db_id>.sqlite")
    p.add_argument(
        "--strategy",
        action="append",
        choices=list(STRATEGIES),
        help="selection strategy; repeatable (default: wct)",
    )
    p.add_argument("--judge", choices=["remote", "oracle", "noisy"], default="oracle")
    p.add_argument("--judge-url", help="base URL of the remote judge endpoint")
    p.add_argument("--judge-model", default="judge", help="model name sent to the remote judge")
    p.add_argument(
        "--judge-accuracy",
        action="append",
        type=float,
        help="noisy-judge keep probability in [0,1]; repeatable for simulate sweeps",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--template", choices=["pjudge", "rjudge"], default="rjudge")
    p.add_argument("--parse-failure", choices=["strict", "abstain"], default="strict")
    p.add_argument("--proxy", choices=["first", "random"], default="first")
    p.add_argument("--float-precision", type=int, default=6)
    p.add_argument("--exec-timeout-ms", type=int, default=30_000)
    p.add_argument("--row-order", choices=["insensitive", "sensitive"], default="insensitive")
    p.add_argument("--bag-semantics", choices=["set", "multiset"], default="set")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=8, help="max questions judged in parallel")
    p.add_argument("--dry-run", action="store_true", help="validate inputs, touch no judge")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqlarena",
        description="Best-of-N SQL selection via execution clustering and pairwise judging.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in [
        ("select", "run selection strategies and report EX/SA"),
        ("prefpairs", "export preference pairs from candidate pools"),
        ("simulate", "Monte Carlo comparison with a synthetic noisy judge"),
    ]:
        _add_common_flags(sub.add_parser(name, help=desc))
    sim = sub.choices["simulate"]
    sim.add_argument("--trials", type=int, default=1000)
    fixture = sub.add_parser("fixture", help="write the bundled toy benchmark")
    fixture.add_argument("--out", required=True)
    return parser


def _config_dict(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items())}


def _write_config(args: argparse.Namespace, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_config_dict(args), indent=2, sort_keys=True, default=str)
    (out_dir / "config.json").write_text(text + "\n", encoding="utf-8")


@dataclass
class _LoadedRun:
    questions: list[Question]
    pools: dict[str, CandidatePool]
    snapshots: dict[str, SchemaSnapshot]
    config: NormalizationConfig
    outcomes: dict[str, list[ExecutionOutcome]]
    gold: dict[str, Optional[ExecutionOutcome]]


def _load_run(args: argparse.Namespace, need_gold: bool) -> _LoadedRun:
    """Validate inputs and execute every candidate (and gold) SQL.

    All path checks happen before any execution; no judge is involved.
    """
    for flag in ("dataset", "candidates", "db_root"):
        if getattr(args, flag) is None:
            raise CliError(f"--{flag.replace('_', '-')} is required")
    dataset_path = Path(args.dataset)
    candidates_path = Path(args.candidates)
    db_root = Path(args.db_root)
    if not db_root.is_dir():
        raise CliError(f"db root {db_root} is not a directory")
    questions = load_dataset(dataset_path)
    pools = load_candidates(candidates_path)
    validate_pools(questions, pools)
    missing = [q.id for q in questions if q.id not in pools]
    if missing:
        raise CliError(f"no candidate pool for questions: {', '.join(missing)}")
    db_paths: dict[str, Path] = {}
    for q in questions:
        if q.db_id not in db_paths:
            path = database_path(db_root, q.db_id)
            if not path.exists():
                raise CliError(f"database file missing: {path}")
            db_paths[q.db_id] = path
    if need_gold and any(q.gold_sql is None for q in questions):
        bad = [q.id for q in questions if q.gold_sql is None]
        raise CliError(f"questions without gold SQL: {', '.join(bad)}")
    config = NormalizationConfig(
        float_precision=args.float_precision,
        row_order=args.row_order,
        bag_semantics=args.bag_semantics,
        exec_timeout_ms=args.exec_timeout_ms,
    )
    snapshots = {db_id: load_schema(path) for db_id, path in db_paths.items()}
    outcomes: dict[str, list[ExecutionOutcome]] = {}
    gold: dict[str, Optional[ExecutionOutcome]] = {}
    for q in questions:
        pool = pools[q.id]
        outcomes[q.id] = execute_pool(db_paths[q.db_id], pool.sql_texts(), config)
        if q.gold_sql is None:
            gold[q.id] = None
        else:
            conn = open_database(db_paths[q.db_id])
            try:
                gold[q.id] = execute_sql(conn, q.gold_sql, config)
            finally:
                conn.close()
    return _LoadedRun(
        questions=questions,
        pools=pools,
        snapshots=snapshots,
        config=config,
        outcomes=outcomes,
        gold=gold,
    )


def _single_accuracy(args: argparse.Namespace, default: float = 0.9) -> float:
    values = args.judge_accuracy or [default]
    if len(values) > 1:
        raise CliError("this command takes a single --judge-accuracy")
    p = values[0]
    if not 0.0 <= p <= 1.0:
        raise CliError(f"--judge-accuracy must be in [0,1], got {p}")
    return p


def _build_judge(args: argparse.Namespace, run: _LoadedRun, out_dir: Path) -> JudgeBackend:
    if args.judge == "oracle":
        return OracleJudge(run.gold, seed=args.seed)
    if args.judge == "noisy":
        return NoisyOracleJudge(run.gold, accuracy=_single_accuracy(args), seed=args.seed)
    if not args.judge_url:
        raise CliError("--judge-url is required with --judge remote")
    remote = RemoteJudge(base_url=args.judge_url, model=args.judge_model)
    return CachedJudge(remote, out_dir / "judge_cache")


def cmd_select(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _write_config(args, out_dir)
    strategies = args.strategy or ["wct"]
    run = _load_run(args, need_gold=args.judge in ("oracle", "noisy"))
    if args.dry_run:
        print(json.dumps({"dry_run": True, "questions": len(run.questions), "strategies": strategies}))
        return EXIT_OK
    judge = _build_judge(args, run, out_dir)
    proxy_policy = "first_index" if args.proxy == "first" else "seeded_random"
    proxy_seed = args.seed if args.proxy == "random" else None

    def run_one(question: Question, strategy: str) -> QuestionEval:
        pool = run.pools[question.id]
        outs = run.outcomes[question.id]
        result = select(
            question,
            pool,
            outs,
            strategy,  # type: ignore[arg-type]
            judge=judge,
            snapshot=run.snapshots[question.db_id],
            template=args.template,
            policy=args.parse_failure,
            proxy_policy=proxy_policy,
            proxy_seed=proxy_seed,
        )
        return QuestionEval(
            question_id=question.id,
            result=result,
            selected_outcome=outs[result.selected_candidate_index],
            gold_outcome=run.gold[question.id],
            difficulty=question.difficulty,
        )

    summaries = []
    traces: list[dict] = []
    selections: list[dict] = []
    for strategy in strategies:
        if args.jobs > 1 and len(run.questions) > 1:
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                evals = list(pool.map(lambda q: run_one(q, strategy), run.questions))
        else:
            evals = [run_one(q, strategy) for q in run.questions]
        summaries.append(summarize(strategy, evals))
        for ev in evals:
            traces.append(serialize_result(ev.question_id, ev.result))
            selections.append(
                {
                    "question_id": ev.question_id,
                    "strategy": strategy,
                    "selected_sql": ev.result.selected_sql,
                    "winner_cluster": ev.result.winner_cluster,
                    "judgment_count": ev.result.judgment_count,
                }
            )
    with (out_dir / "selections.jsonl").open("w", encoding="utf-8") as fh:
        for record in selections:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
    has_gold = any(g is not None for g in run.gold.values())
    if has_gold:
        emit_report(summaries, out_dir / "report.json", traces)
    print(
        json.dumps(
            {
                "questions": len(run.questions),
                "strategies": strategies,
                "selections": str(out_dir / "selections.jsonl"),
                "report": str(out_dir / "report.json") if has_gold else None,
            }
        )
    )
    return EXIT_OK


def cmd_prefpairs(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _write_config(args, out_dir)
    run = _load_run(args, need_gold=False)
    if args.dry_run:
        print(json.dumps({"dry_run": True, "questions": len(run.questions)}))
        return EXIT_OK
    pairs = []
    skips = []
    for q in run.questions:
        if q.gold_sql is None:
            skips.append({"question_id": q.id, "reason": "no_gold_sql"})
            continue
        try:
            pairs.extend(
                build_preference_pairs(
                    q,
                    run.pools[q.id],
                    run.outcomes[q.id],
                    run.gold[q.id],
                    run.snapshots[q.db_id],
                )
            )
        except PreferencePairSkip as skip:
            skips.append({"question_id": skip.question_id, "reason": skip.reason})
    count = export_pairs(pairs, out_dir / "prefpairs.jsonl")
    with (out_dir / "skips.jsonl").open("w", encoding="utf-8") as fh:
        for record in skips:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    print(json.dumps({"pairs": count, "skipped": len(skips), "out": str(out_dir / "prefpairs.jsonl")}))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    _write_config(args, out_dir)
    accuracies = tuple(args.judge_accuracy or (0.6, 0.8, 1.0))
    strategies = tuple(args.strategy or ("sc", "ct", "wct"))
    try:
        config = SimulationConfig(
            accuracies=accuracies,
            trials=args.trials,
            seed=args.seed,
            strategies=strategies,
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.dry_run:
        print(json.dumps({"dry_run": True, "trials": config.trials, "accuracies": list(accuracies)}))
        return EXIT_OK
    rows = simulate(config)
    write_simulation_csv(rows, out_dir / "simulation.csv")
    print(json.dumps({"rows": len(rows), "out": str(out_dir / "simulation.csv")}))
    return EXIT_OK


def cmd_fixture(args: argparse.Namespace) -> int:
    paths = build_toybench(Path(args.out))
    print(
        json.dumps(
            {
                "dataset": str(paths.dataset),
                "candidates": str(paths.candidates),
                "db_root": str(paths.db_root),
            }
        )
    )
    return EXIT_OK


_COMMANDS = {
    "select": cmd_select,
    "prefpairs": cmd_prefpairs,
    "simulate": cmd_simulate,
    "fixture": cmd_fixture,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        _error_record("config", str(exc))
        return EXIT_CONFIG
    except (IngestError, JudgeConfigError) as exc:
        _error_record("config", str(exc))
        return EXIT_CONFIG
    except (FileNotFoundError, OSError) as exc:
        _error_record("io", str(exc))
        return EXIT_CONFIG
    except JudgeTransportError as exc:
        _error_record("transport", str(exc))
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())

"""Best-of-N text-to-SQL selection: cluster by execution result, judge pairwise."""

from .clustering import ClusteringOutput, ConsistentCluster, cluster_candidates, reproxy, select_proxy
from .execution import (
    ExecutionOutcome,
    NormalizationConfig,
    NormalizedResult,
    execute_pool,
    execute_sql,
    normalize_result,
    open_database,
    outcome_from_rows,
    render_result,
    results_equivalent,
)
from .ingest import (
    CandidatePool,
    CandidateSql,
    IngestError,
    Question,
    SchemaSnapshot,
    TableInfo,
    database_path,
    export_candidates,
    load_candidates,
    load_dataset,
    load_schema,
    validate_pools,
)
from .judge import (
    CachedJudge,
    JudgeConfigError,
    JudgeTransportError,
    JudgmentOutcome,
    JudgmentRequest,
    JudgmentSide,
    NoisyOracleJudge,
    OracleJudge,
    RemoteJudge,
    judge_pair,
    make_request,
    parse_judgment,
    render_prompt,
    swap_sides,
)
from .prefdata import (
    PreferencePair,
    PreferencePairSkip,
    RewardInput,
    build_preference_pairs,
    evaluate_reward,
    export_pairs,
    load_pairs,
)
from .report import (
    EvalSummary,
    QuestionEval,
    SimulationConfig,
    compute_ex,
    compute_sa,
    emit_report,
    simulate,
    summarize,
    write_simulation_csv,
)
from .schema_link import SchemaUnion, TableExtractionError, build_union_schema, extract_referenced_tables
from .toybench import build_toybench
from .tournament import (
    ComparisonRecord,
    TournamentResult,
    resolve_parse_failure,
    run_ct,
    run_drt,
    run_sc,
    run_wct,
    select,
    serialize_result,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

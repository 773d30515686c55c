"""cvtt: temporal cross-validation for offline recommender evaluation.

Converts a timestamped interaction log into a sequence of global-temporal
folds, tunes and evaluates classical recommenders per fold, and assembles
performance-over-time reports instead of single-value metrics.
"""

from .errors import ConfigError, CvttError, DataError, FitError
from .ingest import (
    ColumnSchema,
    DatasetStats,
    Interaction,
    InteractionLog,
    PeriodGrid,
    assign_periods,
    build_matrix,
    dataset_stats,
    filter_per_period_activity,
    matrix_from_log,
    parse_interactions,
    write_interactions,
)
from .metrics import (
    EvalOutcome,
    evaluate_ranking,
    hitrate_at_k,
    ndcg_at_k,
    recall_at_k,
)
from .models import (
    ImplicitALS,
    ItemKNN,
    Popularity,
    SLIM,
    knn_similarity,
    load_model,
    make_recommender,
    save_model,
)
from .runner import (
    CVTTReport,
    FoldResult,
    compare_strategies,
    run_cvtt,
    run_fold,
    write_report_csv,
)
from .splits import (
    ClassicStrategy,
    DataStrategy,
    FoldPlan,
    SplitTriple,
    assert_no_leakage,
    classic_split,
    materialize_fold,
    plan_folds,
    randomize_holdout,
)
from .synth import DriftScenario, generate
from .tuning import SearchSpace, TrialRecord, TuneResult, default_space, sample_params, tune

__version__ = "0.1.0"

__all__ = [
    "ClassicStrategy",
    "ColumnSchema",
    "ConfigError",
    "CVTTReport",
    "CvttError",
    "DataError",
    "DataStrategy",
    "DatasetStats",
    "DriftScenario",
    "EvalOutcome",
    "FitError",
    "FoldPlan",
    "FoldResult",
    "ImplicitALS",
    "Interaction",
    "InteractionLog",
    "ItemKNN",
    "PeriodGrid",
    "Popularity",
    "SLIM",
    "SearchSpace",
    "SplitTriple",
    "TrialRecord",
    "TuneResult",
    "assert_no_leakage",
    "assign_periods",
    "build_matrix",
    "classic_split",
    "compare_strategies",
    "dataset_stats",
    "default_space",
    "evaluate_ranking",
    "filter_per_period_activity",
    "generate",
    "hitrate_at_k",
    "knn_similarity",
    "load_model",
    "make_recommender",
    "materialize_fold",
    "matrix_from_log",
    "ndcg_at_k",
    "parse_interactions",
    "plan_folds",
    "randomize_holdout",
    "recall_at_k",
    "run_cvtt",
    "run_fold",
    "sample_params",
    "save_model",
    "tune",
    "write_interactions",
    "write_report_csv",
]

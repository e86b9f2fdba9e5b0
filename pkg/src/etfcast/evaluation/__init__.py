from .ablation import (
    ARCHIVE_COLUMNS,
    CLASSIFIER_ROSTER_DEFAULT,
    REGRESSOR_ROSTER_DEFAULT,
    VARIANTS,
    AblationOutcome,
    ComboResult,
    FoldOutput,
    ModelRoster,
    PlanParams,
    SeriesViews,
    StageResult,
    combine_stage_results,
    concrete_regressor,
    derive_seed,
    fit_classification_fold,
    fit_regression_fold,
    run_ablation,
    run_classification_sweep,
    run_regression_sweep,
    write_archive,
)
from .combine import (
    CombinedEvaluation,
    combine,
    evaluate_combination,
    reconstruct_price_path,
)
from .gridsearch import (
    RECOVERABLE_FIT_ERRORS,
    CandidateScore,
    GridSearchResult,
    grid_search,
)
from .metrics import (
    MetricSet,
    accuracy,
    compute_metrics,
    f1,
    mae,
    mean_metric_sets,
    mse,
)
from .reporting import (
    CM_DISPLAY,
    RM_DISPLAY,
    SUMMARY_CSV_COLUMNS,
    SummaryRow,
    SummaryTable,
    VariantCell,
    build_summary,
    render_summary_text,
    summary_csv_rows,
    write_summary_csv,
)
from .walkforward import (
    Fold,
    WalkForwardPlan,
    make_walk_forward,
    supervised_row_slices,
)

__all__ = [
    "ARCHIVE_COLUMNS",
    "CLASSIFIER_ROSTER_DEFAULT",
    "CM_DISPLAY",
    "REGRESSOR_ROSTER_DEFAULT",
    "RECOVERABLE_FIT_ERRORS",
    "RM_DISPLAY",
    "SUMMARY_CSV_COLUMNS",
    "VARIANTS",
    "AblationOutcome",
    "CandidateScore",
    "CombinedEvaluation",
    "ComboResult",
    "Fold",
    "FoldOutput",
    "GridSearchResult",
    "MetricSet",
    "ModelRoster",
    "PlanParams",
    "SeriesViews",
    "StageResult",
    "SummaryRow",
    "SummaryTable",
    "VariantCell",
    "WalkForwardPlan",
    "accuracy",
    "build_summary",
    "combine",
    "combine_stage_results",
    "compute_metrics",
    "concrete_regressor",
    "derive_seed",
    "evaluate_combination",
    "f1",
    "fit_classification_fold",
    "fit_regression_fold",
    "grid_search",
    "mae",
    "make_walk_forward",
    "mean_metric_sets",
    "mse",
    "reconstruct_price_path",
    "render_summary_text",
    "run_ablation",
    "run_classification_sweep",
    "run_regression_sweep",
    "summary_csv_rows",
    "supervised_row_slices",
    "write_archive",
    "write_summary_csv",
]

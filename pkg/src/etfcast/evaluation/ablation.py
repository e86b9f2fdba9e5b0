"""Sentiment ablation: per-family walk-forward sweeps and their pairing
into combined two-stage results.

One sweep unit is (etf, stage, concrete family, variant): grid search
across the walk-forward folds, then a deterministic refit of the best
candidate per fold for checkpointing. Units are independent, so they
can run in a thread pool and can be skipped individually on resume when
their result file already exists under the workdir.

Variant semantics follow the results table being reproduced: the
with_sentiment column pairs sentiment-consuming stages, the ARIMA row's
sentiment cell is SARIMAX, MA5 has no sentiment cell at all, and the
naive classifiers appear in both columns because they ignore features
either way.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import (
    AllCandidatesFailedError,
    EtfcastError,
    InsufficientDataError,
    InsufficientHistoryError,
    LengthMismatchError,
)
from ..features import (
    DeltaSeries,
    Standardizer,
    make_direction_labels,
    make_lagged,
    make_windows,
    reconstruct_closes,
)
from ..models.checkpoint import content_hash_of, save_checkpoint
from ..models.classification import (
    NAIVE_FAMILIES,
    ClassifierSpec,
    DirectionPrediction,
    FittedClassifier,
    clf_grid,
    fit_clf,
    labels_of,
    predict_clf,
)
from ..models.regression import (
    FittedRegressor,
    RegressionTestData,
    RegressionTrainData,
    RegressorSpec,
    fit_regressor,
    predict_regressor,
    regression_grid,
)
from .combine import combine, evaluate_combination
from .gridsearch import GridSearchResult, grid_search
from .metrics import MetricSet, compute_metrics, mean_metric_sets
from .walkforward import Fold, WalkForwardPlan, make_walk_forward, supervised_row_slices

logger = logging.getLogger(__name__)

VARIANTS = ("price_only", "with_sentiment")
REGRESSOR_ROSTER_DEFAULT = ("MA5", "ARIMA", "SVR", "GBTREG", "LSTMREG")
CLASSIFIER_ROSTER_DEFAULT = ("ALL_UP", "ALL_DOWN", "LOGREG", "SVM_RBF", "DTREE",
                             "RFOREST", "GBTCLF", "LSTMCLF")


def derive_seed(run_seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{run_seed}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass(frozen=True)
class PlanParams:
    horizon: int = 20
    train_fraction: float = 0.6
    min_train: int | None = None

    def plan_for(self, n: int, lookback: int) -> WalkForwardPlan:
        if self.min_train is not None:
            min_train = self.min_train
        else:
            min_train = int(round(self.train_fraction * n))
        # supervised views need at least a couple of training rows past
        # the lookback, whatever the fraction works out to
        min_train = max(min_train, lookback + 2)
        return make_walk_forward(n, self.horizon, min_train)


def concrete_regressor(base_family: str, variant: str) -> str | None:
    """Roster family -> concrete family for a variant; None = no cell."""
    if variant == "price_only":
        return None if base_family == "SARIMAX" else base_family
    if base_family == "MA5":
        return None
    if base_family in ("ARIMA", "SARIMAX"):
        return "SARIMAX"
    return base_family


class SeriesViews:
    """Shared per-series feature views, built once and sliced per fold."""

    def __init__(self, series: DeltaSeries, lookback: int):
        self.series = series
        self.lookback = lookback
        self.closes = reconstruct_closes(series.first_close, series.deltas)
        self.labels = make_direction_labels(series).y
        # lag-1 sentiment aligned to each delta, for the exogenous column
        self.exog = np.concatenate([[0.0], series.sentiments[:-1]])
        self._lagged: dict[bool, Any] = {}
        self._windows: dict[bool, Any] = {}

    def lagged(self, with_sentiment: bool):
        if with_sentiment not in self._lagged:
            self._lagged[with_sentiment] = make_lagged(
                self.series, self.lookback, with_sentiment)
        return self._lagged[with_sentiment]

    def windows(self, with_sentiment: bool):
        if with_sentiment not in self._windows:
            self._windows[with_sentiment] = make_windows(
                self.series, self.lookback, with_sentiment)
        return self._windows[with_sentiment]

    def train_date_range(self, fold: Fold) -> tuple[str, str]:
        return (self.series.dates[0].isoformat(),
                self.series.dates[fold.train_end - 1].isoformat())


def _standardizer_note(fold: Fold, scope: str, train_rows: slice,
                       X_train: np.ndarray) -> dict[str, Any]:
    digest = hashlib.sha256(np.ascontiguousarray(X_train).tobytes()).hexdigest()
    return {"fold": fold.index, "scope": scope,
            "train_rows": [train_rows.start, train_rows.stop],
            "x_hash": digest}


def fit_regression_fold(
    views: SeriesViews, spec: RegressorSpec, fold: Fold, seed: int,
) -> tuple[FittedRegressor, np.ndarray, dict[str, Any] | None]:
    """Fit one regressor on one fold and predict its test block."""
    series = views.series
    L = views.lookback
    first, last = views.train_date_range(fold)
    note = None

    if spec.family in ("ARIMA", "SARIMAX"):
        exog = views.exog if spec.family == "SARIMAX" else None
        train = RegressionTrainData(
            deltas=series.deltas[:fold.train_end],
            exog=None if exog is None else exog[:fold.train_end],
            first=first, last=last)
        test = RegressionTestData(
            deltas=series.deltas[fold.test_start:fold.test_end],
            exog=None if exog is None else exog[fold.test_start:fold.test_end])
    elif spec.family == "MA5":
        lagged = views.lagged(False)
        _, test_rows = supervised_row_slices(fold, L, len(lagged.X))
        train = RegressionTrainData(deltas=series.deltas[:fold.train_end],
                                    first=first, last=last)
        # MA5 averages actual deltas, so its rows stay unstandardized
        test = RegressionTestData(X=lagged.X[test_rows])
    else:
        data = views.windows(spec.uses_sentiment) if spec.family == "LSTMREG" \
            else views.lagged(spec.uses_sentiment)
        train_rows, test_rows = supervised_row_slices(fold, L, len(data.X))
        scope = f"{series.etf.symbol}:{spec.family}:fold{fold.index}"
        std = Standardizer(fit_scope=scope).fit(data.X[train_rows])
        note = _standardizer_note(fold, scope, train_rows, data.X[train_rows])
        train = RegressionTrainData(
            deltas=series.deltas[:fold.train_end],
            X=std.transform(data.X[train_rows]),
            y=data.y[train_rows],
            first=first, last=last)
        test = RegressionTestData(X=std.transform(data.X[test_rows]))

    model = fit_regressor(spec, train, seed=seed)
    preds = predict_regressor(model, test)
    if len(preds) != fold.test_size:
        raise LengthMismatchError(
            f"{spec.family}: {len(preds)} predictions for "
            f"{fold.test_size} test steps")
    return model, preds, note


def fit_classification_fold(
    views: SeriesViews, spec: ClassifierSpec, fold: Fold, seed: int,
) -> tuple[FittedClassifier, list[DirectionPrediction], dict[str, Any] | None]:
    """Fit one classifier on one fold and predict its test block."""
    series = views.series
    L = views.lookback
    first, last = views.train_date_range(fold)
    note = None

    if spec.family in NAIVE_FAMILIES:
        model = fit_clf(spec, None, views.labels[:fold.train_end], seed=seed,
                        first=first, last=last)
        preds = predict_clf(model, None, n=fold.test_size)
        return model, preds, note

    data = views.windows(spec.uses_sentiment) if spec.family == "LSTMCLF" \
        else views.lagged(spec.uses_sentiment)
    train_rows, test_rows = supervised_row_slices(fold, L, len(data.X))
    scope = f"{series.etf.symbol}:{spec.family}:fold{fold.index}"
    std = Standardizer(fit_scope=scope).fit(data.X[train_rows])
    note = _standardizer_note(fold, scope, train_rows, data.X[train_rows])
    # row i targets delta timestep i + L, so label rows share the slices
    y_train = views.labels[L:][train_rows]
    model = fit_clf(spec, std.transform(data.X[train_rows]), y_train,
                    seed=seed, first=first, last=last)
    preds = predict_clf(model, std.transform(data.X[test_rows]))
    return model, preds, note


@dataclass
class FoldOutput:
    fold_index: int
    test_start: int
    test_end: int
    values: list[float]
    probabilities: list[float | None] | None = None
    checkpoint_hash: str | None = None
    checkpoint_path: str | None = None


@dataclass
class StageResult:
    etf: str
    stage: str
    family: str
    base_family: str
    variant: str
    seed: int
    status: str = "ok"
    error: str | None = None
    best_hyperparameters: dict[str, Any] | None = None
    search: GridSearchResult | None = None
    folds: list[FoldOutput] = field(default_factory=list)
    fold_metrics: list[MetricSet] = field(default_factory=list)
    pooled_metrics: MetricSet | None = None
    standardizer_notes: list[dict[str, Any]] = field(default_factory=list)

    def unit_name(self) -> str:
        return f"{self.etf}__{self.stage}__{self.family}__{self.variant}"


def _stage_result_to_dict(result: StageResult) -> dict[str, Any]:
    doc = {
        "etf": result.etf,
        "stage": result.stage,
        "family": result.family,
        "base_family": result.base_family,
        "variant": result.variant,
        "seed": result.seed,
        "status": result.status,
        "error": result.error,
        "best_hyperparameters": result.best_hyperparameters,
        "search": None,
        "folds": [asdict(f) for f in result.folds],
        "fold_metrics": [m.as_dict() for m in result.fold_metrics],
        "pooled_metrics": result.pooled_metrics.as_dict()
        if result.pooled_metrics else None,
        "standardizer_notes": result.standardizer_notes,
    }
    if result.search is not None:
        doc["search"] = {
            "selection_metric": result.search.selection_metric,
            "best_index": result.search.best_index,
            "best_hyperparameters": result.search.best_hyperparameters,
            "candidates": [asdict(c) for c in result.search.candidates],
        }
    return doc


def _metric_set_from_dict(doc: dict[str, Any] | None) -> MetricSet | None:
    if doc is None:
        return None
    return MetricSet(mse=doc["mse"], mae=doc["mae"],
                     accuracy=doc.get("accuracy"), f1=doc.get("f1"))


def _stage_result_from_dict(doc: dict[str, Any]) -> StageResult:
    search = None
    if doc.get("search"):
        from .gridsearch import CandidateScore

        search = GridSearchResult(
            selection_metric=doc["search"]["selection_metric"],
            best_index=doc["search"]["best_index"],
            best_hyperparameters=doc["search"]["best_hyperparameters"],
            candidates=[CandidateScore(**c) for c in doc["search"]["candidates"]],
        )
    return StageResult(
        etf=doc["etf"], stage=doc["stage"], family=doc["family"],
        base_family=doc["base_family"], variant=doc["variant"],
        seed=doc["seed"], status=doc["status"], error=doc["error"],
        best_hyperparameters=doc["best_hyperparameters"], search=search,
        folds=[FoldOutput(**f) for f in doc["folds"]],
        fold_metrics=[_metric_set_from_dict(m) for m in doc["fold_metrics"]],
        pooled_metrics=_metric_set_from_dict(doc.get("pooled_metrics")),
        standardizer_notes=doc.get("standardizer_notes", []),
    )


def run_regression_sweep(
    views: SeriesViews,
    base_family: str,
    variant: str,
    plan: WalkForwardPlan,
    seed: int,
    grid_override: list[dict[str, Any]] | None = None,
    checkpoint_dir: Path | None = None,
) -> StageResult:
    family = concrete_regressor(base_family, variant)
    if family is None:
        raise EtfcastError(f"{base_family} has no {variant} cell")
    uses_sent = variant == "with_sentiment"
    if family == "MA5":
        uses_sent = False
    result = StageResult(etf=views.series.etf.symbol, stage="regression",
                         family=family, base_family=base_family,
                         variant=variant, seed=seed)
    grid = grid_override if grid_override is not None else regression_grid(family)

    def scorer(hp: dict[str, Any], fold: Fold) -> float:
        spec = RegressorSpec(family=family, hyperparameters=hp,
                             uses_sentiment=uses_sent)
        _, preds, _ = fit_regression_fold(views, spec, fold, seed)
        actual = views.series.deltas[fold.test_start:fold.test_end]
        return compute_metrics(preds, actual, "regression").mse

    try:
        search = grid_search(grid, plan, scorer, "mse")
    except (AllCandidatesFailedError, InsufficientDataError,
            InsufficientHistoryError) as exc:
        result.status = "failed"
        result.error = f"{type(exc).__name__}: {exc}"
        logger.warning("regression sweep %s failed: %s",
                       result.unit_name(), result.error)
        return result

    result.search = search
    result.best_hyperparameters = search.best_hyperparameters
    best_spec = RegressorSpec(family=family,
                              hyperparameters=search.best_hyperparameters,
                              uses_sentiment=uses_sent)
    for fold in plan.folds:
        model, preds, note = fit_regression_fold(views, best_spec, fold, seed)
        if note is not None:
            result.standardizer_notes.append(note)
        output = FoldOutput(fold_index=fold.index, test_start=fold.test_start,
                            test_end=fold.test_end,
                            values=[float(v) for v in preds])
        if checkpoint_dir is not None:
            path = checkpoint_dir / f"{result.unit_name()}__fold{fold.index}.ckpt"
            output.checkpoint_hash = save_checkpoint(model, path)
            output.checkpoint_path = str(path)
        else:
            output.checkpoint_hash = content_hash_of(model)
        result.folds.append(output)
        actual = views.series.deltas[fold.test_start:fold.test_end]
        result.fold_metrics.append(compute_metrics(preds, actual, "regression"))
    result.pooled_metrics = mean_metric_sets(result.fold_metrics)
    return result


def run_classification_sweep(
    views: SeriesViews,
    family: str,
    variant: str,
    plan: WalkForwardPlan,
    seed: int,
    grid_override: list[dict[str, Any]] | None = None,
    checkpoint_dir: Path | None = None,
) -> StageResult:
    # naive families ignore features, so their sentiment cell is the
    # same constant predictor and uses_sentiment stays False for them
    uses_sent = variant == "with_sentiment" and family not in NAIVE_FAMILIES
    result = StageResult(etf=views.series.etf.symbol, stage="classification",
                         family=family, base_family=family,
                         variant=variant, seed=seed)
    grid = grid_override if grid_override is not None else clf_grid(family)

    def scorer(hp: dict[str, Any], fold: Fold) -> float:
        spec = ClassifierSpec(family=family, hyperparameters=hp,
                              uses_sentiment=uses_sent)
        _, preds, _ = fit_classification_fold(views, spec, fold, seed)
        actual = views.labels[fold.test_start:fold.test_end]
        return compute_metrics(labels_of(preds), actual, "classification").f1

    try:
        search = grid_search(grid, plan, scorer, "f1")
    except (AllCandidatesFailedError, InsufficientDataError,
            InsufficientHistoryError) as exc:
        result.status = "failed"
        result.error = f"{type(exc).__name__}: {exc}"
        logger.warning("classification sweep %s failed: %s",
                       result.unit_name(), result.error)
        return result

    result.search = search
    result.best_hyperparameters = search.best_hyperparameters
    best_spec = ClassifierSpec(family=family,
                               hyperparameters=search.best_hyperparameters,
                               uses_sentiment=uses_sent)
    for fold in plan.folds:
        model, preds, note = fit_classification_fold(views, best_spec, fold, seed)
        if note is not None:
            result.standardizer_notes.append(note)
        output = FoldOutput(
            fold_index=fold.index, test_start=fold.test_start,
            test_end=fold.test_end,
            values=[float(p.label) for p in preds],
            probabilities=[p.probability for p in preds])
        if checkpoint_dir is not None:
            path = checkpoint_dir / f"{result.unit_name()}__fold{fold.index}.ckpt"
            output.checkpoint_hash = save_checkpoint(model, path)
            output.checkpoint_path = str(path)
        else:
            output.checkpoint_hash = content_hash_of(model)
        result.folds.append(output)
        actual = views.labels[fold.test_start:fold.test_end]
        result.fold_metrics.append(
            compute_metrics(labels_of(preds), actual, "classification"))
    result.pooled_metrics = mean_metric_sets(result.fold_metrics)
    return result


@dataclass
class ComboResult:
    etf: str
    classifier_family: str
    regressor_family: str
    variant: str
    classifier_spec: dict[str, Any] | None = None
    regressor_spec: dict[str, Any] | None = None
    status: str = "ok"
    error: str | None = None
    fold_delta_metrics: list[MetricSet] = field(default_factory=list)
    fold_price_metrics: list[MetricSet] = field(default_factory=list)
    aggregate_delta: MetricSet | None = None
    aggregate_price: MetricSet | None = None
    direction_metrics: MetricSet | None = None
    archive_rows: list[dict[str, Any]] = field(default_factory=list)
    archive_path: str | None = None

    def combo_name(self) -> str:
        return (f"{self.etf}__{self.classifier_family}__"
                f"{self.regressor_family}__{self.variant}")


def _combo_to_dict(combo: ComboResult) -> dict[str, Any]:
    return {
        "etf": combo.etf,
        "classifier_family": combo.classifier_family,
        "regressor_family": combo.regressor_family,
        "variant": combo.variant,
        "classifier_spec": combo.classifier_spec,
        "regressor_spec": combo.regressor_spec,
        "status": combo.status,
        "error": combo.error,
        "fold_delta_metrics": [m.as_dict() for m in combo.fold_delta_metrics],
        "fold_price_metrics": [m.as_dict() for m in combo.fold_price_metrics],
        "aggregate_delta": combo.aggregate_delta.as_dict()
        if combo.aggregate_delta else None,
        "aggregate_price": combo.aggregate_price.as_dict()
        if combo.aggregate_price else None,
        "direction_metrics": combo.direction_metrics.as_dict()
        if combo.direction_metrics else None,
        "archive_path": combo.archive_path,
    }


def _combo_from_dict(doc: dict[str, Any]) -> ComboResult:
    return ComboResult(
        etf=doc["etf"],
        classifier_family=doc["classifier_family"],
        regressor_family=doc["regressor_family"],
        variant=doc["variant"],
        classifier_spec=doc.get("classifier_spec"),
        regressor_spec=doc.get("regressor_spec"),
        status=doc["status"],
        error=doc.get("error"),
        fold_delta_metrics=[_metric_set_from_dict(m)
                            for m in doc["fold_delta_metrics"]],
        fold_price_metrics=[_metric_set_from_dict(m)
                            for m in doc["fold_price_metrics"]],
        aggregate_delta=_metric_set_from_dict(doc.get("aggregate_delta")),
        aggregate_price=_metric_set_from_dict(doc.get("aggregate_price")),
        direction_metrics=_metric_set_from_dict(doc.get("direction_metrics")),
        archive_path=doc.get("archive_path"),
    )


ARCHIVE_COLUMNS = ("etf", "date", "actual_delta", "predicted_magnitude",
                   "predicted_direction", "combined_delta", "actual_close",
                   "predicted_close")


def combine_stage_results(views: SeriesViews, clf_result: StageResult,
                          reg_result: StageResult, variant: str) -> ComboResult:
    combo = ComboResult(etf=views.series.etf.symbol,
                        classifier_family=clf_result.family,
                        regressor_family=reg_result.base_family,
                        variant=variant)
    if clf_result.status != "ok" or reg_result.status != "ok":
        combo.status = "failed"
        parts = []
        if clf_result.status != "ok":
            parts.append(f"classifier: {clf_result.error}")
        if reg_result.status != "ok":
            parts.append(f"regressor: {reg_result.error}")
        combo.error = "; ".join(parts)
        return combo

    combo.classifier_spec = {
        "family": clf_result.family,
        "hyperparameters": clf_result.best_hyperparameters,
        "uses_sentiment": clf_result.variant == "with_sentiment"
        and clf_result.family not in NAIVE_FAMILIES,
    }
    combo.regressor_spec = {
        "family": reg_result.family,
        "hyperparameters": reg_result.best_hyperparameters,
        "uses_sentiment": reg_result.family == "SARIMAX"
        or (reg_result.variant == "with_sentiment"
            and reg_result.family != "MA5"),
    }

    series = views.series
    all_pred_labels: list[int] = []
    all_actual_labels: list[int] = []
    for reg_fold, clf_fold in zip(reg_result.folds, clf_result.folds):
        start, end = reg_fold.test_start, reg_fold.test_end
        magnitudes = np.asarray(reg_fold.values, dtype=np.float64)
        directions = [DirectionPrediction(label=int(v)) for v in clf_fold.values]
        combined = combine(magnitudes, directions)
        actual_deltas = series.deltas[start:end]
        anchor = float(views.closes[start])
        evaluation = evaluate_combination(combined, actual_deltas, anchor)
        combo.fold_delta_metrics.append(evaluation.delta_metrics)
        combo.fold_price_metrics.append(evaluation.price_metrics)
        all_pred_labels.extend(int(v) for v in clf_fold.values)
        all_actual_labels.extend(int(v) for v in views.labels[start:end])
        for k in range(start, end):
            i = k - start
            combo.archive_rows.append({
                "etf": series.etf.symbol,
                "date": series.dates[k].isoformat(),
                "actual_delta": float(actual_deltas[i]),
                "predicted_magnitude": float(abs(magnitudes[i])),
                "predicted_direction": directions[i].multiplier,
                "combined_delta": float(combined[i]),
                "actual_close": float(evaluation.actual_closes[i]),
                "predicted_close": float(evaluation.predicted_closes[i]),
            })
    combo.aggregate_delta = mean_metric_sets(combo.fold_delta_metrics)
    combo.aggregate_price = mean_metric_sets(combo.fold_price_metrics)
    combo.direction_metrics = compute_metrics(
        np.array(all_pred_labels), np.array(all_actual_labels), "classification")
    return combo


def write_archive(combo: ComboResult, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(ARCHIVE_COLUMNS)]
    for row in combo.archive_rows:
        lines.append(",".join(
            str(row[c]) if not isinstance(row[c], float) else repr(row[c])
            for c in ARCHIVE_COLUMNS))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    combo.archive_path = str(path)


@dataclass
class ModelRoster:
    regressors: tuple[str, ...] = REGRESSOR_ROSTER_DEFAULT
    classifiers: tuple[str, ...] = CLASSIFIER_ROSTER_DEFAULT
    per_stage_sentiment: bool = False


@dataclass
class AblationOutcome:
    stage_results: list[StageResult]
    combo_results: list[ComboResult]


def _load_or_run(path: Path | None, runner, to_dict, from_dict):
    if path is not None and path.exists():
        return from_dict(json.loads(path.read_text(encoding="utf-8"))), True
    value = runner()
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(to_dict(value), sort_keys=True, indent=2)
                        + "\n", encoding="utf-8")
    return value, False


def run_ablation(
    series_by_etf: dict[str, DeltaSeries],
    roster: ModelRoster,
    plan_params: PlanParams,
    lookback: int,
    run_seed: int,
    workdir: Path | None = None,
    max_workers: int = 1,
    grid_overrides: dict[str, list[dict[str, Any]]] | None = None,
    combine_stages: bool = True,
) -> AblationOutcome:
    """Run every sweep unit and pair stage results into combos.

    When a workdir is given, sweep and combo results are persisted as
    JSON files named after their unit; an existing file short-circuits
    recomputation, which is what makes interrupted runs resumable.
    With combine_stages off only the per-stage sweeps run, which is the
    train-only entry point.
    """
    grid_overrides = grid_overrides or {}
    sweep_dir = workdir / "sweep" if workdir else None
    combo_dir = workdir / "combos" if workdir else None
    archive_dir = workdir / "archives" if workdir else None
    checkpoint_dir = workdir / "checkpoints" if workdir else None
    if checkpoint_dir is not None:
        checkpoint_dir.mkdir(parents=True, exist_ok=True)

    views_by_etf: dict[str, SeriesViews] = {}
    plans: dict[str, WalkForwardPlan] = {}
    plan_errors: dict[str, str] = {}
    for symbol, series in sorted(series_by_etf.items()):
        views_by_etf[symbol] = SeriesViews(series, lookback)
        try:
            plans[symbol] = plan_params.plan_for(len(series.deltas), lookback)
        except InsufficientDataError as exc:
            plan_errors[symbol] = f"InsufficientDataError: {exc}"
            logger.warning("no walk-forward plan for %s: %s", symbol, exc)

    # enumerate sweep units: (symbol, stage, family-or-base, variant)
    reg_units = []
    clf_units = []
    for symbol in sorted(series_by_etf):
        for variant in VARIANTS:
            for base in roster.regressors:
                if concrete_regressor(base, variant) is not None:
                    reg_units.append((symbol, base, variant))
            for family in roster.classifiers:
                clf_units.append((symbol, family, variant))

    def _planless_result(symbol: str, stage: str, family: str, base: str,
                         variant: str, seed: int) -> StageResult:
        return StageResult(etf=symbol, stage=stage, family=family,
                           base_family=base, variant=variant, seed=seed,
                           status="failed", error=plan_errors[symbol])

    def reg_runner(symbol: str, base: str, variant: str):
        family = concrete_regressor(base, variant)
        label = f"{symbol}:regression:{family}:{variant}"
        seed = derive_seed(run_seed, label)
        path = None
        if sweep_dir is not None:
            path = sweep_dir / f"{symbol}__regression__{family}__{variant}.json"
        if symbol in plan_errors:
            runner = lambda: _planless_result(symbol, "regression", family,
                                              base, variant, seed)
        else:
            runner = lambda: run_regression_sweep(
                views_by_etf[symbol], base, variant, plans[symbol], seed,
                grid_override=grid_overrides.get(family),
                checkpoint_dir=checkpoint_dir)
        return _load_or_run(path, runner, _stage_result_to_dict,
                            _stage_result_from_dict)

    def clf_runner(symbol: str, family: str, variant: str):
        label = f"{symbol}:classification:{family}:{variant}"
        seed = derive_seed(run_seed, label)
        path = None
        if sweep_dir is not None:
            path = sweep_dir / f"{symbol}__classification__{family}__{variant}.json"
        if symbol in plan_errors:
            runner = lambda: _planless_result(symbol, "classification", family,
                                              family, variant, seed)
        else:
            runner = lambda: run_classification_sweep(
                views_by_etf[symbol], family, variant, plans[symbol], seed,
                grid_override=grid_overrides.get(family),
                checkpoint_dir=checkpoint_dir)
        return _load_or_run(path, runner, _stage_result_to_dict,
                            _stage_result_from_dict)

    reg_results: dict[tuple[str, str, str], StageResult] = {}
    clf_results: dict[tuple[str, str, str], StageResult] = {}
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            reg_futures = {key: pool.submit(reg_runner, *key) for key in reg_units}
            clf_futures = {key: pool.submit(clf_runner, *key) for key in clf_units}
            for key, future in reg_futures.items():
                reg_results[key], _ = future.result()
            for key, future in clf_futures.items():
                clf_results[key], _ = future.result()
    else:
        for key in reg_units:
            reg_results[key], _ = reg_runner(*key)
        for key in clf_units:
            clf_results[key], _ = clf_runner(*key)

    stage_results = [reg_results[k] for k in reg_units] + \
                    [clf_results[k] for k in clf_units]

    if not combine_stages:
        return AblationOutcome(stage_results=stage_results, combo_results=[])

    combos: list[ComboResult] = []
    pairings: list[tuple[str, tuple, tuple, str]] = []
    for symbol in sorted(series_by_etf):
        for variant in VARIANTS:
            for family in roster.classifiers:
                for base in roster.regressors:
                    if concrete_regressor(base, variant) is None:
                        continue
                    pairings.append((symbol, (symbol, family, variant),
                                     (symbol, base, variant), variant))
        if roster.per_stage_sentiment:
            # mixed cells reuse the pure sweeps across variants
            for family in roster.classifiers:
                for base in roster.regressors:
                    if concrete_regressor(base, "with_sentiment") is not None:
                        pairings.append((
                            symbol, (symbol, family, "price_only"),
                            (symbol, base, "with_sentiment"),
                            "sentiment_regression_only"))
                    pairings.append((
                        symbol, (symbol, family, "with_sentiment"),
                        (symbol, base, "price_only"),
                        "sentiment_classification_only"))

    for symbol, clf_key, reg_key, variant in pairings:
        clf_result = clf_results[clf_key]
        reg_result = reg_results[reg_key]
        name = (f"{symbol}__{clf_result.family}__"
                f"{reg_result.base_family}__{variant}")
        path = combo_dir / f"{name}.json" if combo_dir else None

        def combo_runner():
            combo = combine_stage_results(views_by_etf[symbol], clf_result,
                                          reg_result, variant)
            if archive_dir is not None and combo.status == "ok":
                write_archive(combo, archive_dir / f"{name}.csv")
            return combo

        combo, _ = _load_or_run(path, combo_runner, _combo_to_dict,
                                _combo_from_dict)
        combos.append(combo)

    return AblationOutcome(stage_results=stage_results, combo_results=combos)

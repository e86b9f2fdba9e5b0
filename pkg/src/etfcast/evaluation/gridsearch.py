"""Grid search over hyperparameter candidates across walk-forward folds.

The search itself is model-agnostic: a scorer callable evaluates one
candidate on one fold and returns the selection metric. A candidate
fails as a whole if any of its folds raises a model error; the failure
is recorded, not propagated, unless every candidate fails.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..errors import (
    AllCandidatesFailedError,
    DegenerateTrainingError,
    EtfcastError,
    InsufficientHistoryError,
    NonConvergenceError,
)
from .walkforward import Fold, WalkForwardPlan

logger = logging.getLogger(__name__)

# errors that mark a candidate failed instead of aborting the sweep
RECOVERABLE_FIT_ERRORS = (NonConvergenceError, DegenerateTrainingError,
                          InsufficientHistoryError)

SELECTION_MODES = {"mse": "min", "f1": "max"}


@dataclass
class CandidateScore:
    hyperparameters: dict[str, Any]
    fold_scores: list[float] = field(default_factory=list)
    mean_score: float | None = None
    status: str = "ok"
    error: str | None = None


@dataclass
class GridSearchResult:
    selection_metric: str
    best_index: int
    best_hyperparameters: dict[str, Any]
    candidates: list[CandidateScore]


def grid_search(
    candidates: list[dict[str, Any]],
    plan: WalkForwardPlan,
    fold_scorer: Callable[[dict[str, Any], Fold], float],
    selection_metric: str,
) -> GridSearchResult:
    if not candidates:
        raise AllCandidatesFailedError("empty candidate grid")
    if selection_metric not in SELECTION_MODES:
        raise EtfcastError(f"unknown selection metric {selection_metric!r}")

    scored: list[CandidateScore] = []
    for hp in candidates:
        record = CandidateScore(hyperparameters=dict(hp))
        try:
            for fold in plan.folds:
                record.fold_scores.append(float(fold_scorer(hp, fold)))
        except RECOVERABLE_FIT_ERRORS as exc:
            record.status = "failed"
            record.error = f"{type(exc).__name__}: {exc}"
            record.fold_scores = []
            logger.warning("candidate %s failed: %s", hp, record.error)
        else:
            record.mean_score = float(np.mean(record.fold_scores))
        scored.append(record)

    usable = [(i, c) for i, c in enumerate(scored) if c.status == "ok"]
    if not usable:
        raise AllCandidatesFailedError(
            f"all {len(scored)} candidates failed; "
            f"first error: {scored[0].error}")

    if SELECTION_MODES[selection_metric] == "min":
        best_index = min(usable, key=lambda pair: pair[1].mean_score)[0]
    else:
        best_index = max(usable, key=lambda pair: pair[1].mean_score)[0]
    # min/max are stable over equal keys, so ties keep grid order

    return GridSearchResult(
        selection_metric=selection_metric,
        best_index=best_index,
        best_hyperparameters=dict(scored[best_index].hyperparameters),
        candidates=scored,
    )

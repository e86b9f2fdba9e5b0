"""Error and classification metrics with fixed edge-case conventions.

F1 uses the positive class 1 and is defined as 0 whenever its
denominator vanishes (no positive predictions and no positive labels).
Accuracy is an exact count ratio so the all-up / all-down identity
accuracy(ALL_UP) + accuracy(ALL_DOWN) = 1 holds without tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, LengthMismatchError


@dataclass(frozen=True)
class MetricSet:
    mse: float
    mae: float
    accuracy: float | None = None
    f1: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {"mse": self.mse, "mae": self.mae,
                "accuracy": self.accuracy, "f1": self.f1}


def _check_pair(preds: np.ndarray, actuals: np.ndarray) -> None:
    if len(preds) != len(actuals):
        raise LengthMismatchError(
            f"{len(preds)} predictions vs {len(actuals)} actuals")
    if len(preds) == 0:
        raise EmptyInputError("cannot score empty vectors")


def mse(preds: np.ndarray, actuals: np.ndarray) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    _check_pair(preds, actuals)
    diff = preds - actuals
    return float(np.mean(diff * diff))


def mae(preds: np.ndarray, actuals: np.ndarray) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    _check_pair(preds, actuals)
    return float(np.mean(np.abs(preds - actuals)))


def accuracy(pred_labels: np.ndarray, actual_labels: np.ndarray) -> float:
    pred_labels = np.asarray(pred_labels, dtype=np.int64)
    actual_labels = np.asarray(actual_labels, dtype=np.int64)
    _check_pair(pred_labels, actual_labels)
    return float(np.count_nonzero(pred_labels == actual_labels)) / len(pred_labels)


def f1(pred_labels: np.ndarray, actual_labels: np.ndarray) -> float:
    pred_labels = np.asarray(pred_labels, dtype=np.int64)
    actual_labels = np.asarray(actual_labels, dtype=np.int64)
    _check_pair(pred_labels, actual_labels)
    tp = int(np.count_nonzero((pred_labels == 1) & (actual_labels == 1)))
    fp = int(np.count_nonzero((pred_labels == 1) & (actual_labels == 0)))
    fn = int(np.count_nonzero((pred_labels == 0) & (actual_labels == 1)))
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2.0 * tp / denom


def compute_metrics(preds: np.ndarray, actuals: np.ndarray,
                    kind: str = "regression") -> MetricSet:
    if kind not in ("regression", "classification"):
        raise ValueError(f"unknown metric kind {kind!r}")
    base_mse = mse(preds, actuals)
    base_mae = mae(preds, actuals)
    if kind == "regression":
        return MetricSet(mse=base_mse, mae=base_mae)
    return MetricSet(mse=base_mse, mae=base_mae,
                     accuracy=accuracy(preds, actuals),
                     f1=f1(preds, actuals))


def mean_metric_sets(sets: list[MetricSet]) -> MetricSet:
    if not sets:
        raise EmptyInputError("no metric sets to average")

    def _mean(values: list[float | None]) -> float | None:
        if any(v is None for v in values):
            return None
        return float(np.mean([float(v) for v in values]))

    return MetricSet(
        mse=float(np.mean([s.mse for s in sets])),
        mae=float(np.mean([s.mae for s in sets])),
        accuracy=_mean([s.accuracy for s in sets]),
        f1=_mean([s.f1 for s in sets]),
    )

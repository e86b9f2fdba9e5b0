"""Two-stage combination: magnitude from regression, sign from direction.

combined_t = |magnitude_t| * multiplier_t. Metrics are reported in two
spaces: on the combined deltas directly, and on reconstructed price
levels where the predicted path starts at the last training close and
accumulates combined deltas across the test block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, LengthMismatchError
from ..models.classification import DirectionPrediction
from .metrics import MetricSet, compute_metrics


def combine(magnitude_preds: np.ndarray,
            direction_preds: list[DirectionPrediction]) -> np.ndarray:
    magnitude_preds = np.asarray(magnitude_preds, dtype=np.float64)
    if len(magnitude_preds) != len(direction_preds):
        raise LengthMismatchError(
            f"{len(magnitude_preds)} magnitudes vs "
            f"{len(direction_preds)} directions")
    mult = np.array([p.multiplier for p in direction_preds], dtype=np.float64)
    return np.abs(magnitude_preds) * mult


def reconstruct_price_path(anchor_close: float, deltas: np.ndarray) -> np.ndarray:
    """Price levels implied by a delta sequence from a known last close."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if len(deltas) == 0:
        raise EmptyInputError("no deltas to accumulate")
    return anchor_close + np.cumsum(deltas)


@dataclass(frozen=True)
class CombinedEvaluation:
    delta_metrics: MetricSet
    price_metrics: MetricSet
    combined: np.ndarray
    predicted_closes: np.ndarray
    actual_closes: np.ndarray


def evaluate_combination(combined: np.ndarray, actual_deltas: np.ndarray,
                         anchor_close: float) -> CombinedEvaluation:
    combined = np.asarray(combined, dtype=np.float64)
    actual_deltas = np.asarray(actual_deltas, dtype=np.float64)
    if len(combined) != len(actual_deltas):
        raise LengthMismatchError(
            f"{len(combined)} combined vs {len(actual_deltas)} actual deltas")
    predicted = reconstruct_price_path(anchor_close, combined)
    actual = reconstruct_price_path(anchor_close, actual_deltas)
    return CombinedEvaluation(
        delta_metrics=compute_metrics(combined, actual_deltas, "regression"),
        price_metrics=compute_metrics(predicted, actual, "regression"),
        combined=combined,
        predicted_closes=predicted,
        actual_closes=actual,
    )

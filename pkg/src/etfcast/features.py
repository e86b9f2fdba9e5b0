"""Supervised-learning transforms over aligned panels.

The close series becomes a delta series; a fixed lookback window L turns
it into either 3-D window tensors (samples x L x features) for
sequential models or flattened lagged rows for the rest. Sample i covers
delta timesteps [i, i+L) and targets the delta at i+L, so features
always strictly precede their target.

Flattening order is all delta lags oldest to newest, then all sentiment
lags oldest to newest; a lagged row is exactly the channel-major flatten
of the matching window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import EmptySliceError, InsufficientHistoryError, NotFittedError, TooShortPanelError
from .ingestion.types import EtfId
from .sentiment.panel import AlignedPanel


@dataclass
class DeltaSeries:
    """Day-over-day close changes with date-aligned sentiment.

    ``deltas[i] = close[i+1] - close[i]``; ``dates[i]`` and
    ``sentiments[i]`` belong to the delta's own date (the later close).
    """

    etf: EtfId
    dates: list[date]
    deltas: np.ndarray
    sentiments: np.ndarray
    first_close: float

    def __len__(self):
        return len(self.deltas)


def to_deltas(panel: AlignedPanel) -> DeltaSeries:
    if len(panel.rows) < 2:
        raise TooShortPanelError(
            f"panel for {panel.etf.symbol} has {len(panel.rows)} rows")
    closes = np.asarray(panel.closes, dtype=np.float64)
    sentiments = np.asarray(panel.sentiments, dtype=np.float64)
    return DeltaSeries(
        etf=panel.etf,
        dates=panel.dates[1:],
        deltas=np.diff(closes),
        sentiments=sentiments[1:],
        first_close=float(closes[0]),
    )


def reconstruct_closes(first_close: float, deltas: np.ndarray) -> np.ndarray:
    """Inverse of to_deltas: the full close series including the anchor."""
    return np.concatenate([[first_close], first_close + np.cumsum(deltas)])


@dataclass
class WindowedDataset:
    """3-D tensors for sequential models: X is (samples, L, F)."""

    X: np.ndarray
    y: np.ndarray
    lookback: int
    feature_names: list[str]
    target_dates: list[date]

    @property
    def n_features(self) -> int:
        return self.X.shape[2]

    def __len__(self):
        return len(self.y)


@dataclass
class LaggedMatrix:
    """Flattened lagged rows for non-sequential models: X is (samples, L*F)."""

    X: np.ndarray
    y: np.ndarray
    lookback: int
    feature_names: list[str]
    target_dates: list[date]

    def __len__(self):
        return len(self.y)


def _window_stack(values: np.ndarray, L: int) -> np.ndarray:
    # rows i -> values[i : i+L], for i in [0, len(values) - L)
    n = len(values) - L
    return np.stack([values[i:i + L] for i in range(n)])


def make_windows(series: DeltaSeries, L: int, with_sentiment: bool) -> WindowedDataset:
    n = len(series.deltas)
    if n <= L:
        raise InsufficientHistoryError(f"{n} deltas cannot fill lookback {L}")
    delta_wins = _window_stack(series.deltas, L)
    channels = [delta_wins]
    names = [f"delta_t-{k}" for k in range(L, 0, -1)]
    if with_sentiment:
        channels.append(_window_stack(series.sentiments, L))
        names += [f"sentiment_t-{k}" for k in range(L, 0, -1)]
    X = np.stack(channels, axis=2)
    return WindowedDataset(
        X=X,
        y=series.deltas[L:].copy(),
        lookback=L,
        feature_names=names,
        target_dates=series.dates[L:],
    )


def flatten_windows(X: np.ndarray) -> np.ndarray:
    """Channel-major flatten: all of channel 0 oldest to newest, then
    channel 1, matching the lagged-row layout."""
    n, L, F = X.shape
    return np.concatenate([X[:, :, f] for f in range(F)], axis=1)


def unflatten_rows(X: np.ndarray, L: int) -> np.ndarray:
    """Inverse of flatten_windows for rows of width L*F."""
    n, width = X.shape
    F = width // L
    return np.stack([X[:, f * L:(f + 1) * L] for f in range(F)], axis=2)


def make_lagged(series: DeltaSeries, L: int, with_sentiment: bool) -> LaggedMatrix:
    windows = make_windows(series, L, with_sentiment)
    return LaggedMatrix(
        X=flatten_windows(windows.X),
        y=windows.y,
        lookback=L,
        feature_names=windows.feature_names,
        target_dates=windows.target_dates,
    )


@dataclass
class DirectionLabels:
    """Binary movement labels aligned to deltas: 1 for up, 0 otherwise."""

    y: np.ndarray

    @property
    def n_up(self) -> int:
        return int(self.y.sum())

    @property
    def n_down(self) -> int:
        return int(len(self.y) - self.y.sum())


def make_direction_labels(series: DeltaSeries) -> DirectionLabels:
    # a delta of exactly zero counts as down-or-neutral
    return DirectionLabels(y=(series.deltas > 0).astype(np.int64))


@dataclass
class Standardizer:
    """Per-column mean/std transform fitted on a training slice only.

    Uses the population convention (divide by n). A degenerate column
    with zero spread maps to all zeros instead of raising, since fully
    imputed sentiment columns are expected for zero-coverage sectors.
    """

    fit_scope: str = ""
    mean_: np.ndarray | None = field(default=None, repr=False)
    std_: np.ndarray | None = field(default=None, repr=False)

    def fit(self, rows: np.ndarray) -> "Standardizer":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.size == 0:
            raise EmptySliceError(f"empty training slice for {self.fit_scope!r}")
        self.mean_ = rows.mean(axis=0)
        self.std_ = rows.std(axis=0)
        return self

    def transform(self, rows: np.ndarray) -> np.ndarray:
        if self.mean_ is None or self.std_ is None:
            raise NotFittedError("standardizer used before fit")
        rows = np.asarray(rows, dtype=np.float64)
        safe = np.where(self.std_ == 0.0, 1.0, self.std_)
        out = (rows - self.mean_) / safe
        return np.where(self.std_ == 0.0, 0.0, out)

    def fit_transform(self, rows: np.ndarray) -> np.ndarray:
        return self.fit(rows).transform(rows)

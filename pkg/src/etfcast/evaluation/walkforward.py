"""Expanding-window walk-forward splits over delta timesteps.

Fold j trains on [0, min_train + j*horizon) and tests on the next
horizon steps; a shorter tail block is kept when at least one step
remains. Training always ends strictly before testing begins, so any
mutation of rows after a fold's test block cannot reach that fold.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InsufficientDataError, InsufficientHistoryError


@dataclass(frozen=True)
class Fold:
    index: int
    train_end: int
    test_start: int
    test_end: int

    def __post_init__(self):
        if not (0 < self.train_end == self.test_start < self.test_end):
            raise InsufficientDataError(f"bad fold geometry {self}")

    @property
    def train_indices(self) -> range:
        return range(0, self.train_end)

    @property
    def test_indices(self) -> range:
        return range(self.test_start, self.test_end)

    @property
    def test_size(self) -> int:
        return self.test_end - self.test_start


@dataclass(frozen=True)
class WalkForwardPlan:
    n_total: int
    horizon: int
    min_train: int
    folds: tuple[Fold, ...]


def make_walk_forward(n: int, horizon: int, min_train: int) -> WalkForwardPlan:
    if horizon < 1:
        raise InsufficientDataError(f"horizon must be positive, got {horizon}")
    if min_train < 1:
        raise InsufficientDataError(f"min_train must be positive, got {min_train}")
    # a partial tail shorter than the horizon still forms a fold, so the
    # only unsatisfiable request is one with no test step at all
    if min_train >= n:
        raise InsufficientDataError(
            f"min_train {min_train} leaves no test steps in {n} rows")
    folds = []
    start = min_train
    while start < n:
        end = min(start + horizon, n)
        folds.append(Fold(index=len(folds), train_end=start,
                          test_start=start, test_end=end))
        start = end
    return WalkForwardPlan(n_total=n, horizon=horizon, min_train=min_train,
                           folds=tuple(folds))


def supervised_row_slices(fold: Fold, lookback: int, n_rows: int) -> tuple[slice, slice]:
    """Map a fold from delta timesteps to lagged/window row indices.

    Row i targets delta timestep i + lookback, so training rows are
    [0, train_end - lookback) and test rows are the next test_size rows.
    """
    train_stop = fold.train_end - lookback
    if train_stop < 1:
        raise InsufficientHistoryError(
            f"fold {fold.index}: training slice of {fold.train_end} deltas "
            f"gives no rows at lookback {lookback}")
    test_stop = train_stop + fold.test_size
    if test_stop > n_rows:
        raise InsufficientHistoryError(
            f"fold {fold.index}: needs {test_stop} rows, have {n_rows}")
    return slice(0, train_stop), slice(train_stop, test_stop)

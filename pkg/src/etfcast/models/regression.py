"""Regression stage: next-step delta forecasters behind one interface.

Six families. MA5, ARIMA and SARIMAX consume the raw delta sequence
(SARIMAX additionally takes a sentiment exogenous column); SVR and
GBTREG consume flattened lagged rows; LSTMREG consumes 3-D window
tensors. ``fit_regressor`` returns an immutable FittedRegressor whose
state is plain numpy / sklearn objects so checkpoints stay portable.

Sequence families predict one step ahead: the prediction for test step
t conditions on actual deltas through t-1 (Kalman filtering with the
training-time parameters held fixed), never on step t itself.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DegenerateTrainingError, NonConvergenceError, ShapeMismatchError
from .lstm import FittedLstm, LstmArchitecture, LstmTrainConfig, fit_lstm, restore_lstm

REGRESSION_FAMILIES = ("MA5", "ARIMA", "SARIMAX", "SVR", "GBTREG", "LSTMREG")
SEQUENCE_FAMILIES = ("MA5", "ARIMA", "SARIMAX")
DEFAULT_SEED = 42
MA_SPAN = 5


@dataclass(frozen=True)
class RegressorSpec:
    family: str
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    uses_sentiment: bool = False

    def __post_init__(self):
        if self.family not in REGRESSION_FAMILIES:
            raise ShapeMismatchError(f"unknown regression family {self.family!r}")
        if self.family == "MA5" and self.uses_sentiment:
            raise ShapeMismatchError("MA5 has no sentiment variant")

    def label(self) -> str:
        parts = [f"{k}={self.hyperparameters[k]}" for k in sorted(self.hyperparameters)]
        suffix = "+sent" if self.uses_sentiment else ""
        return f"{self.family}({', '.join(parts)}){suffix}"


@dataclass(frozen=True)
class DataFingerprint:
    """Identifies the exact training slice a model saw."""

    first: str
    last: str
    n_rows: int
    data_hash: str


def fingerprint_training_data(*arrays: np.ndarray | None,
                              first: str = "", last: str = "") -> DataFingerprint:
    digest = hashlib.sha256()
    n_rows = 0
    for a in arrays:
        if a is None:
            digest.update(b"none;")
            continue
        a = np.ascontiguousarray(a)
        digest.update(str(a.dtype).encode())
        digest.update(str(a.shape).encode())
        digest.update(a.tobytes())
        n_rows = max(n_rows, len(a))
    return DataFingerprint(first=first, last=last, n_rows=n_rows,
                           data_hash=digest.hexdigest())


@dataclass
class RegressionTrainData:
    """Family-appropriate training views over one fold's training slice.

    ``deltas`` is always the raw training delta sequence. ``exog`` is
    the lag-1 sentiment column aligned to it (sequence sentiment
    variant). ``X``/``y`` are the supervised views: 2-D lagged rows for
    SVR/GBTREG, 3-D windows for LSTMREG, already standardized by the
    caller where appropriate.
    """

    deltas: np.ndarray
    exog: np.ndarray | None = None
    X: np.ndarray | None = None
    y: np.ndarray | None = None
    first: str = ""
    last: str = ""


@dataclass
class RegressionTestData:
    """Prediction-time inputs; which fields matter depends on family."""

    deltas: np.ndarray | None = None
    exog: np.ndarray | None = None
    X: np.ndarray | None = None


@dataclass
class FittedRegressor:
    spec: RegressorSpec
    seed: int
    fingerprint: DataFingerprint
    state: Any


def regression_grid(family: str) -> list[dict[str, Any]]:
    if family == "MA5":
        return [{}]
    if family in ("ARIMA", "SARIMAX"):
        return [{"p": p, "d": d, "q": q}
                for p, d, q in itertools.product((0, 1, 2), (0,), (0, 1, 2))]
    if family == "SVR":
        return [{"kernel": "rbf", "C": c, "epsilon": e}
                for c, e in itertools.product((0.1, 1.0, 10.0), (0.01, 0.1))]
    if family == "GBTREG":
        return [{"max_depth": m, "learning_rate": lr, "n_estimators": t}
                for m, lr, t in itertools.product((2, 3, 4), (0.05, 0.1), (100, 200))]
    if family == "LSTMREG":
        return [{"n_layers": nl, "hidden_size": h, "optimizer": opt, "epochs": 50}
                for nl, h, opt in itertools.product((1, 2), (16, 32), ("adam", "sgd"))]
    raise ShapeMismatchError(f"unknown regression family {family!r}")


def _fit_sarimax(deltas: np.ndarray, exog: np.ndarray | None,
                 order: tuple[int, int, int]) -> np.ndarray:
    import statsmodels.api as sm

    model = sm.tsa.SARIMAX(deltas, exog=exog, order=order, trend="c")
    try:
        result = model.fit(disp=0)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NonConvergenceError(f"order {order}: {exc}") from exc
    retvals = getattr(result, "mle_retvals", None) or {}
    if retvals.get("converged") is False:
        raise NonConvergenceError(f"order {order}: optimizer did not converge")
    params = np.asarray(result.params, dtype=np.float64)
    if not np.all(np.isfinite(params)):
        raise NonConvergenceError(f"order {order}: non-finite parameters")
    return params


def _sarimax_forecast(train_deltas: np.ndarray, train_exog: np.ndarray | None,
                      params: np.ndarray, order: tuple[int, int, int],
                      future_deltas: np.ndarray,
                      future_exog: np.ndarray | None) -> np.ndarray:
    """One-step-ahead predictions over the future block.

    The filter runs over train + future with the training-time params;
    with dynamic prediction off, the value at step t only conditions on
    observations before t.
    """
    import statsmodels.api as sm

    full = np.concatenate([train_deltas, future_deltas])
    full_exog = None
    if train_exog is not None:
        if future_exog is None:
            raise ShapeMismatchError("model was fit with exog but none supplied")
        full_exog = np.concatenate([train_exog, future_exog])
    model = sm.tsa.SARIMAX(full, exog=full_exog, order=order, trend="c")
    result = model.smooth(params)
    start = len(train_deltas)
    preds = result.predict(start=start, end=len(full) - 1, dynamic=False)
    return np.asarray(preds, dtype=np.float64)


def fit_regressor(spec: RegressorSpec, train: RegressionTrainData,
                  seed: int = DEFAULT_SEED) -> FittedRegressor:
    deltas = np.asarray(train.deltas, dtype=np.float64)
    if deltas.size == 0:
        raise DegenerateTrainingError("empty training deltas")
    hp = spec.hyperparameters
    family = spec.family

    if family == "MA5":
        state = None
        fp_arrays: tuple = (deltas,)
    elif family in ("ARIMA", "SARIMAX"):
        order = (int(hp.get("p", 0)), int(hp.get("d", 0)), int(hp.get("q", 0)))
        exog = None
        if family == "SARIMAX":
            if train.exog is None:
                raise ShapeMismatchError("SARIMAX requires an exogenous column")
            exog = np.asarray(train.exog, dtype=np.float64)
            if len(exog) != len(deltas):
                raise ShapeMismatchError(
                    f"{len(exog)} exog rows vs {len(deltas)} deltas")
        params = _fit_sarimax(deltas, exog, order)
        state = {"params": params, "order": order,
                 "train_deltas": deltas.copy(),
                 "train_exog": None if exog is None else exog.copy()}
        fp_arrays = (deltas, exog)
    elif family in ("SVR", "GBTREG"):
        if train.X is None or train.y is None:
            raise ShapeMismatchError(f"{family} requires lagged rows")
        X = np.asarray(train.X, dtype=np.float64)
        y = np.asarray(train.y, dtype=np.float64)
        if X.ndim != 2 or len(X) != len(y):
            raise ShapeMismatchError(f"bad supervised shapes {X.shape} / {y.shape}")
        if family == "SVR":
            from sklearn.svm import SVR

            est = SVR(kernel=hp.get("kernel", "rbf"), C=float(hp.get("C", 1.0)),
                      epsilon=float(hp.get("epsilon", 0.1)))
        else:
            from sklearn.ensemble import GradientBoostingRegressor

            est = GradientBoostingRegressor(
                max_depth=int(hp.get("max_depth", 3)),
                learning_rate=float(hp.get("learning_rate", 0.1)),
                n_estimators=int(hp.get("n_estimators", 100)),
                random_state=seed)
        est.fit(X, y)
        state = est
        fp_arrays = (X, y)
    elif family == "LSTMREG":
        if train.X is None or train.y is None:
            raise ShapeMismatchError("LSTMREG requires window tensors")
        X = np.asarray(train.X, dtype=np.float64)
        if X.ndim != 3:
            raise ShapeMismatchError(f"LSTMREG wants (n, L, F), got {X.shape}")
        arch = LstmArchitecture(n_features=X.shape[2],
                                hidden_size=int(hp.get("hidden_size", 16)),
                                n_layers=int(hp.get("n_layers", 1)))
        config = LstmTrainConfig(epochs=int(hp.get("epochs", 50)),
                                 optimizer=str(hp.get("optimizer", "adam")),
                                 learning_rate=float(hp.get("learning_rate", 0.01)))
        rng = np.random.default_rng(seed)
        state = fit_lstm(X, np.asarray(train.y, dtype=np.float64),
                         arch, config, rng, classify=False)
        fp_arrays = (X, np.asarray(train.y, dtype=np.float64))
    else:  # pragma: no cover - RegressorSpec already validates
        raise ShapeMismatchError(f"unknown regression family {family!r}")

    fingerprint = fingerprint_training_data(*fp_arrays, first=train.first,
                                            last=train.last)
    return FittedRegressor(spec=spec, seed=seed, fingerprint=fingerprint,
                           state=state)


def predict_regressor(model: FittedRegressor, test: RegressionTestData) -> np.ndarray:
    family = model.spec.family

    if family == "MA5":
        if test.X is None or test.X.ndim != 2:
            raise ShapeMismatchError("MA5 expects a 2-D raw delta-lag matrix")
        span = min(MA_SPAN, test.X.shape[1])
        return np.asarray(test.X[:, -span:], dtype=np.float64).mean(axis=1)

    if family in ("ARIMA", "SARIMAX"):
        if test.deltas is None or len(test.deltas) == 0:
            raise ShapeMismatchError(f"{family} expects future actual deltas")
        return _sarimax_forecast(
            model.state["train_deltas"], model.state["train_exog"],
            model.state["params"], model.state["order"],
            np.asarray(test.deltas, dtype=np.float64),
            None if test.exog is None else np.asarray(test.exog, dtype=np.float64))

    if family in ("SVR", "GBTREG"):
        if test.X is None or test.X.ndim != 2:
            raise ShapeMismatchError(f"{family} expects 2-D lagged rows")
        return np.asarray(model.state.predict(test.X), dtype=np.float64)

    if family == "LSTMREG":
        if test.X is None or test.X.ndim != 3:
            raise ShapeMismatchError("LSTMREG expects 3-D window tensors")
        return model.state.predict(np.asarray(test.X, dtype=np.float64))

    raise ShapeMismatchError(f"unknown regression family {family!r}")

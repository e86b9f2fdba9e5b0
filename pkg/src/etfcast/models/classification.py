"""Direction stage: binary up vs down-or-neutral classifiers.

Mirrors the regression module's conventions. Naive baselines ignore
their inputs entirely; classical learners consume standardized lagged
rows; LSTMCLF consumes the same 3-D window tensors as LSTMREG with a
sigmoid head. Probabilistic families are thresholded here, not inside
sklearn, so the p >= 0.5 boundary convention is in one place.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DegenerateTrainingError, ShapeMismatchError
from .lstm import LstmArchitecture, LstmTrainConfig, fit_lstm
from .regression import DEFAULT_SEED, DataFingerprint, fingerprint_training_data

CLASSIFIER_FAMILIES = ("ALL_UP", "ALL_DOWN", "LOGREG", "SVM_RBF", "DTREE",
                       "RFOREST", "GBTCLF", "LSTMCLF")
NAIVE_FAMILIES = ("ALL_UP", "ALL_DOWN")
# these raise on single-class training data instead of fitting a constant
_NEEDS_BOTH_CLASSES = ("LOGREG", "SVM_RBF", "GBTCLF")


@dataclass(frozen=True)
class ClassifierSpec:
    family: str
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    uses_sentiment: bool = False

    def __post_init__(self):
        if self.family not in CLASSIFIER_FAMILIES:
            raise ShapeMismatchError(f"unknown classifier family {self.family!r}")
        if self.family in NAIVE_FAMILIES and self.hyperparameters:
            raise ShapeMismatchError(f"{self.family} takes no hyperparameters")

    def label(self) -> str:
        parts = [f"{k}={self.hyperparameters[k]}" for k in sorted(self.hyperparameters)]
        suffix = "+sent" if self.uses_sentiment else ""
        return f"{self.family}({', '.join(parts)}){suffix}"


@dataclass(frozen=True)
class DirectionPrediction:
    label: int
    probability: float | None = None

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ShapeMismatchError(f"label must be 0 or 1, got {self.label!r}")
        if self.probability is not None:
            p = self.probability
            if not (0.0 <= p <= 1.0):
                raise ShapeMismatchError(f"probability {p} outside [0, 1]")
            if (p >= 0.5) != (self.label == 1):
                raise ShapeMismatchError(
                    f"label {self.label} inconsistent with probability {p}")

    @property
    def multiplier(self) -> int:
        return 2 * self.label - 1


@dataclass
class FittedClassifier:
    spec: ClassifierSpec
    seed: int
    fingerprint: DataFingerprint
    state: Any


def clf_grid(family: str) -> list[dict[str, Any]]:
    if family in NAIVE_FAMILIES:
        return [{}]
    if family == "LOGREG":
        return [{"C": c} for c in (0.1, 1.0, 10.0)]
    if family == "SVM_RBF":
        return [{"C": c, "gamma": g}
                for c, g in itertools.product((0.1, 1.0, 10.0), ("scale", 0.1))]
    if family == "DTREE":
        return [{"max_depth": d} for d in (2, 3, 5)]
    if family == "RFOREST":
        return [{"n_estimators": t, "max_depth": d}
                for t, d in itertools.product((100, 200), (3, 5))]
    if family == "GBTCLF":
        return [{"max_depth": m, "learning_rate": lr, "n_estimators": t}
                for m, lr, t in itertools.product((2, 3), (0.05, 0.1), (100, 200))]
    if family == "LSTMCLF":
        return [{"n_layers": nl, "hidden_size": h, "epochs": 50}
                for nl, h in itertools.product((1, 2), (16, 32))]
    raise ShapeMismatchError(f"unknown classifier family {family!r}")


def _build_sklearn_classifier(family: str, hp: dict[str, Any], seed: int):
    if family == "LOGREG":
        from sklearn.linear_model import LogisticRegression

        return LogisticRegression(C=float(hp.get("C", 1.0)), max_iter=1000,
                                  random_state=seed)
    if family == "SVM_RBF":
        from sklearn.svm import SVC

        gamma = hp.get("gamma", "scale")
        if gamma != "scale":
            gamma = float(gamma)
        return SVC(kernel="rbf", C=float(hp.get("C", 1.0)), gamma=gamma,
                   random_state=seed)
    if family == "DTREE":
        from sklearn.tree import DecisionTreeClassifier

        return DecisionTreeClassifier(max_depth=int(hp.get("max_depth", 3)),
                                      random_state=seed)
    if family == "RFOREST":
        from sklearn.ensemble import RandomForestClassifier

        return RandomForestClassifier(n_estimators=int(hp.get("n_estimators", 100)),
                                      max_depth=int(hp.get("max_depth", 3)),
                                      random_state=seed)
    if family == "GBTCLF":
        from sklearn.ensemble import GradientBoostingClassifier

        return GradientBoostingClassifier(
            max_depth=int(hp.get("max_depth", 3)),
            learning_rate=float(hp.get("learning_rate", 0.1)),
            n_estimators=int(hp.get("n_estimators", 100)),
            random_state=seed)
    raise ShapeMismatchError(f"unknown sklearn classifier {family!r}")


def fit_clf(spec: ClassifierSpec, X: np.ndarray | None, y: np.ndarray,
            seed: int = DEFAULT_SEED, first: str = "",
            last: str = "") -> FittedClassifier:
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise DegenerateTrainingError("empty training labels")
    family = spec.family
    hp = spec.hyperparameters

    if family in NAIVE_FAMILIES:
        state = None
        fp_arrays: tuple = (y,)
    else:
        if X is None:
            raise ShapeMismatchError(f"{family} requires features")
        X = np.asarray(X, dtype=np.float64)
        if len(X) != len(y):
            raise ShapeMismatchError(f"{len(X)} rows vs {len(y)} labels")
        single_class = len(np.unique(y)) < 2
        if single_class and family in _NEEDS_BOTH_CLASSES:
            raise DegenerateTrainingError(
                f"{family} needs both classes, got only {int(y[0])}")
        if family == "LSTMCLF":
            if X.ndim != 3:
                raise ShapeMismatchError(f"LSTMCLF wants (n, L, F), got {X.shape}")
            arch = LstmArchitecture(n_features=X.shape[2],
                                    hidden_size=int(hp.get("hidden_size", 16)),
                                    n_layers=int(hp.get("n_layers", 1)))
            config = LstmTrainConfig(epochs=int(hp.get("epochs", 50)),
                                     optimizer=str(hp.get("optimizer", "adam")),
                                     learning_rate=float(hp.get("learning_rate", 0.01)))
            rng = np.random.default_rng(seed)
            state = fit_lstm(X, y.astype(np.float64), arch, config, rng,
                             classify=True)
        else:
            if X.ndim != 2:
                raise ShapeMismatchError(f"{family} wants 2-D rows, got {X.shape}")
            est = _build_sklearn_classifier(family, hp, seed)
            est.fit(X, y)
            state = est
        fp_arrays = (X, y)

    fingerprint = fingerprint_training_data(*fp_arrays, first=first, last=last)
    return FittedClassifier(spec=spec, seed=seed, fingerprint=fingerprint,
                            state=state)


def _proba_of_up(est, X: np.ndarray) -> np.ndarray:
    proba = est.predict_proba(X)
    classes = list(est.classes_)
    if 1 in classes:
        return proba[:, classes.index(1)]
    return np.zeros(len(X))


def predict_clf(model: FittedClassifier, X: np.ndarray | None,
                n: int | None = None) -> list[DirectionPrediction]:
    family = model.spec.family

    if family in NAIVE_FAMILIES:
        if n is None:
            if X is None:
                raise ShapeMismatchError("naive predict needs X or a count")
            n = len(X)
        label = 1 if family == "ALL_UP" else 0
        return [DirectionPrediction(label=label) for _ in range(n)]

    if X is None:
        raise ShapeMismatchError(f"{family} requires features")
    X = np.asarray(X, dtype=np.float64)

    if family == "LSTMCLF":
        if X.ndim != 3:
            raise ShapeMismatchError(f"LSTMCLF expects (n, L, F), got {X.shape}")
        probs = model.state.predict(X)
        return [DirectionPrediction(label=int(p >= 0.5), probability=float(p))
                for p in probs]

    if X.ndim != 2:
        raise ShapeMismatchError(f"{family} expects 2-D rows, got {X.shape}")

    if family == "SVM_RBF":
        # no probability surface without Platt scaling, so none is emitted
        labels = model.state.predict(X)
        return [DirectionPrediction(label=int(v)) for v in labels]

    probs = _proba_of_up(model.state, X)
    return [DirectionPrediction(label=int(p >= 0.5), probability=float(p))
            for p in probs]


def multipliers(predictions: list[DirectionPrediction]) -> np.ndarray:
    return np.array([p.multiplier for p in predictions], dtype=np.float64)


def labels_of(predictions: list[DirectionPrediction]) -> np.ndarray:
    return np.array([p.label for p in predictions], dtype=np.int64)

from .checkpoint import (
    CHECKPOINT_SCHEMA_VERSION,
    checkpoint_document,
    content_hash_of,
    load_checkpoint,
    save_checkpoint,
)
from .classification import (
    CLASSIFIER_FAMILIES,
    NAIVE_FAMILIES,
    ClassifierSpec,
    DirectionPrediction,
    FittedClassifier,
    clf_grid,
    fit_clf,
    labels_of,
    multipliers,
    predict_clf,
)
from .lstm import (
    FittedLstm,
    LstmArchitecture,
    LstmTrainConfig,
    fit_lstm,
    restore_lstm,
)
from .regression import (
    DEFAULT_SEED,
    MA_SPAN,
    REGRESSION_FAMILIES,
    SEQUENCE_FAMILIES,
    DataFingerprint,
    FittedRegressor,
    RegressionTestData,
    RegressionTrainData,
    RegressorSpec,
    fingerprint_training_data,
    fit_regressor,
    predict_regressor,
    regression_grid,
)

__all__ = [
    "CHECKPOINT_SCHEMA_VERSION",
    "CLASSIFIER_FAMILIES",
    "DEFAULT_SEED",
    "MA_SPAN",
    "NAIVE_FAMILIES",
    "REGRESSION_FAMILIES",
    "SEQUENCE_FAMILIES",
    "ClassifierSpec",
    "DataFingerprint",
    "DirectionPrediction",
    "FittedClassifier",
    "FittedLstm",
    "FittedRegressor",
    "LstmArchitecture",
    "LstmTrainConfig",
    "RegressionTestData",
    "RegressionTrainData",
    "RegressorSpec",
    "checkpoint_document",
    "clf_grid",
    "content_hash_of",
    "fingerprint_training_data",
    "fit_clf",
    "fit_lstm",
    "fit_regressor",
    "labels_of",
    "load_checkpoint",
    "multipliers",
    "predict_clf",
    "predict_regressor",
    "regression_grid",
    "restore_lstm",
    "save_checkpoint",
]

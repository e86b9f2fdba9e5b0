import base64
import json

import numpy as np
import pytest

from etfcast.errors import CorruptCheckpointError
from etfcast.models.checkpoint import (
    checkpoint_document,
    content_hash_of,
    load_checkpoint,
    save_checkpoint,
)
from etfcast.models.classification import (
    ClassifierSpec,
    clf_grid,
    fit_clf,
    labels_of,
    predict_clf,
)
from etfcast.models.regression import (
    RegressionTestData,
    RegressionTrainData,
    RegressorSpec,
    fit_regressor,
    predict_regressor,
    regression_grid,
)
from etfcast.synthetic import ar1_series


def fit_example_regressor(family, rng, seed=0):
    hp = regression_grid(family)[0]
    deltas = ar1_series(phi=0.5, n=80, sigma=1.0, seed=1)
    sent = np.zeros(80)
    L = 5
    rows = np.stack([deltas[i:i + L] for i in range(75)])
    y = deltas[L:]
    train = RegressionTrainData(
        deltas=deltas, exog=sent if family == "SARIMAX" else None,
        X=rows[:, :, None] if family == "LSTMREG" else rows, y=y,
        first="2024-01-02", last="2024-04-30")
    spec = RegressorSpec(family=family, hyperparameters=hp,
                         uses_sentiment=family == "SARIMAX")
    return fit_regressor(spec, train, seed=seed), train


def fit_example_classifier(family, rng, seed=0):
    hp = clf_grid(family)[0]
    X = np.vstack([rng.normal(loc=1.0, size=(25, 5)),
                   rng.normal(loc=-1.0, size=(25, 5))])
    y = np.array([1] * 25 + [0] * 25)
    spec = ClassifierSpec(family=family, hyperparameters=hp)
    if family in ("ALL_UP", "ALL_DOWN"):
        return fit_clf(spec, None, y, seed=seed), None
    if family == "LSTMCLF":
        X = X[:, :, None]
    return fit_clf(spec, X, y, seed=seed), X


REG_FAMILIES = ("MA5", "ARIMA", "SARIMAX", "SVR", "GBTREG", "LSTMREG")
CLF_FAMILIES = ("ALL_UP", "ALL_DOWN", "LOGREG", "SVM_RBF", "DTREE", "RFOREST",
                "GBTCLF", "LSTMCLF")


@pytest.mark.parametrize("family", REG_FAMILIES)
def test_regressor_roundtrip_predictions_identical(family, rng, tmp_path):
    model, train = fit_example_regressor(family, rng)
    path = tmp_path / f"{family}.ckpt"
    save_checkpoint(model, path)
    back = load_checkpoint(path)
    assert back.spec == model.spec
    assert back.fingerprint == model.fingerprint

    future = ar1_series(phi=0.5, n=10, sigma=1.0, seed=2)
    if family in ("ARIMA", "SARIMAX"):
        test = RegressionTestData(deltas=future,
                                  exog=np.zeros(10) if family == "SARIMAX" else None)
    elif family == "LSTMREG":
        test = RegressionTestData(X=np.asarray(train.X)[:6])
    else:
        test = RegressionTestData(X=np.asarray(train.X)[:6])
    np.testing.assert_allclose(predict_regressor(model, test),
                               predict_regressor(back, test), atol=1e-12)


@pytest.mark.parametrize("family", CLF_FAMILIES)
def test_classifier_roundtrip_predictions_identical(family, rng, tmp_path):
    model, X = fit_example_classifier(family, rng)
    path = tmp_path / f"{family}.ckpt"
    save_checkpoint(model, path)
    back = load_checkpoint(path)
    assert back.spec == model.spec
    a = predict_clf(model, X, n=None if X is not None else 4)
    b = predict_clf(back, X, n=None if X is not None else 4)
    np.testing.assert_array_equal(labels_of(a), labels_of(b))
    probs_a = [p.probability for p in a]
    probs_b = [p.probability for p in b]
    assert probs_a == probs_b


@pytest.mark.parametrize("family", REG_FAMILIES)
def test_refit_on_identical_data_gives_identical_hash(family, rng):
    """The resume path depends on a re-fit with the same inputs hashing
    the same; round-tripped pickles need not be byte-stable."""
    a, _ = fit_example_regressor(family, rng, seed=0)
    b, _ = fit_example_regressor(family, rng, seed=0)
    assert content_hash_of(a) == content_hash_of(b)


def test_checkpoint_hash_depends_on_header(rng):
    a, _ = fit_example_regressor("MA5", rng, seed=0)
    c, _ = fit_example_regressor("MA5", rng, seed=1)
    assert content_hash_of(a) != content_hash_of(c)


def test_envelope_fields_present(rng, tmp_path):
    model, _ = fit_example_regressor("SVR", rng)
    doc = checkpoint_document(model)
    for key in ("schema_version", "stage", "family", "hyperparameters",
                "uses_sentiment", "seed", "data_fingerprint", "payload_b64",
                "content_hash"):
        assert key in doc
    assert doc["stage"] == "regression"
    assert doc["schema_version"] == 1


def test_load_rejects_tampered_header(rng, tmp_path):
    model, _ = fit_example_regressor("SVR", rng)
    path = tmp_path / "x.ckpt"
    save_checkpoint(model, path)
    doc = json.loads(path.read_text())
    doc["seed"] = 999
    path.write_text(json.dumps(doc))
    with pytest.raises(CorruptCheckpointError, match="hash mismatch"):
        load_checkpoint(path)


def test_load_rejects_tampered_payload(rng, tmp_path):
    model, _ = fit_example_regressor("SVR", rng)
    path = tmp_path / "x.ckpt"
    save_checkpoint(model, path)
    doc = json.loads(path.read_text())
    payload = bytearray(base64.b64decode(doc["payload_b64"]))
    payload[len(payload) // 2] ^= 0xFF
    doc["payload_b64"] = base64.b64encode(bytes(payload)).decode()
    path.write_text(json.dumps(doc))
    with pytest.raises(CorruptCheckpointError, match="hash mismatch"):
        load_checkpoint(path)


def test_load_rejects_missing_fields(rng, tmp_path):
    model, _ = fit_example_regressor("SVR", rng)
    path = tmp_path / "x.ckpt"
    save_checkpoint(model, path)
    doc = json.loads(path.read_text())
    doc.pop("data_fingerprint")
    path.write_text(json.dumps(doc))
    with pytest.raises(CorruptCheckpointError, match="missing fields"):
        load_checkpoint(path)


def test_load_rejects_wrong_schema_version(rng, tmp_path):
    model, _ = fit_example_regressor("SVR", rng)
    path = tmp_path / "x.ckpt"
    save_checkpoint(model, path)
    doc = json.loads(path.read_text())
    doc["schema_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(CorruptCheckpointError, match="schema version"):
        load_checkpoint(path)


def test_load_rejects_non_json_and_truncation(rng, tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_text("not json {{{")
    with pytest.raises(CorruptCheckpointError, match="unreadable"):
        load_checkpoint(path)
    path.write_text("[1, 2, 3]")
    with pytest.raises(CorruptCheckpointError, match="not an object"):
        load_checkpoint(path)
    model, _ = fit_example_regressor("SVR", rng)
    full = tmp_path / "full.ckpt"
    save_checkpoint(model, full)
    truncated = tmp_path / "trunc.ckpt"
    truncated.write_text(full.read_text()[:-40])
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(truncated)


def test_load_missing_file(tmp_path):
    with pytest.raises(CorruptCheckpointError):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_no_torch_objects_in_payload(rng):
    model, _ = fit_example_regressor("LSTMREG", rng)
    doc = checkpoint_document(model)
    payload = base64.b64decode(doc["payload_b64"])
    assert b"torch" not in payload

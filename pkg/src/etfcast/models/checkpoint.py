"""Self-describing checkpoint files for fitted models.

Envelope is a single JSON document:

    {
      "schema_version": 1,
      "stage": "regression" | "classification",
      "family": "...",
      "hyperparameters": {...},
      "uses_sentiment": bool,
      "seed": int,
      "data_fingerprint": {"first", "last", "n_rows", "data_hash"},
      "payload_b64": "<base64 pickle of the family state>",
      "content_hash": "<sha256 of canonical header + raw payload>"
    }

The content hash covers every header field (canonical sorted-key JSON)
plus the payload bytes, so any tampering or truncation is caught before
unpickling. LSTM state is converted to plain numpy arrays first; no
torch objects ever hit the pickle stream.
"""

from __future__ import annotations

import base64
import dataclasses
import hashlib
import json
import pickle
from pathlib import Path
from typing import Any

from ..errors import CorruptCheckpointError
from .classification import ClassifierSpec, FittedClassifier
from .lstm import FittedLstm, LstmArchitecture, LstmTrainConfig, restore_lstm
from .regression import DataFingerprint, FittedRegressor, RegressorSpec

CHECKPOINT_SCHEMA_VERSION = 1


def _lstm_to_plain(fitted: FittedLstm) -> dict[str, Any]:
    return {
        "kind": "lstm",
        "arch": dataclasses.asdict(fitted.arch),
        "train_config": dataclasses.asdict(fitted.train_config),
        "classify": fitted.classify,
        "loss_history": list(fitted.loss_history),
        "weights": fitted.weight_arrays(),
    }


def _lstm_from_plain(plain: dict[str, Any]) -> FittedLstm:
    return restore_lstm(
        arch=LstmArchitecture(**plain["arch"]),
        train_config=LstmTrainConfig(**plain["train_config"]),
        classify=plain["classify"],
        loss_history=plain["loss_history"],
        weights=plain["weights"],
    )


def _encode_payload(state: Any) -> bytes:
    if isinstance(state, FittedLstm):
        state = _lstm_to_plain(state)
    return pickle.dumps(state, protocol=4)


def _decode_payload(payload: bytes) -> Any:
    state = pickle.loads(payload)
    if isinstance(state, dict) and state.get("kind") == "lstm":
        state = _lstm_from_plain(state)
    return state


def _header(model: FittedRegressor | FittedClassifier, stage: str) -> dict[str, Any]:
    return {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "stage": stage,
        "family": model.spec.family,
        "hyperparameters": model.spec.hyperparameters,
        "uses_sentiment": model.spec.uses_sentiment,
        "seed": model.seed,
        "data_fingerprint": dataclasses.asdict(model.fingerprint),
    }


def _content_hash(header: dict[str, Any], payload: bytes) -> str:
    canonical = json.dumps(header, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256()
    digest.update(canonical.encode("utf-8"))
    digest.update(payload)
    return digest.hexdigest()


def checkpoint_document(model: FittedRegressor | FittedClassifier) -> dict[str, Any]:
    stage = "regression" if isinstance(model, FittedRegressor) else "classification"
    header = _header(model, stage)
    payload = _encode_payload(model.state)
    doc = dict(header)
    doc["payload_b64"] = base64.b64encode(payload).decode("ascii")
    doc["content_hash"] = _content_hash(header, payload)
    return doc


def content_hash_of(model: FittedRegressor | FittedClassifier) -> str:
    return checkpoint_document(model)["content_hash"]


def save_checkpoint(model: FittedRegressor | FittedClassifier,
                    path: str | Path) -> str:
    doc = checkpoint_document(model)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return doc["content_hash"]


_HEADER_KEYS = ("schema_version", "stage", "family", "hyperparameters",
                "uses_sentiment", "seed", "data_fingerprint")


def load_checkpoint(path: str | Path) -> FittedRegressor | FittedClassifier:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise CorruptCheckpointError(f"{path}: unreadable envelope: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptCheckpointError(f"{path}: envelope is not an object")

    missing = [k for k in (*_HEADER_KEYS, "payload_b64", "content_hash")
               if k not in doc]
    if missing:
        raise CorruptCheckpointError(f"{path}: missing fields {missing}")

    version = doc["schema_version"]
    if version != CHECKPOINT_SCHEMA_VERSION:
        raise CorruptCheckpointError(
            f"{path}: schema version {version!r}, "
            f"expected {CHECKPOINT_SCHEMA_VERSION}")

    try:
        payload = base64.b64decode(doc["payload_b64"], validate=True)
    except (ValueError, TypeError) as exc:
        raise CorruptCheckpointError(f"{path}: bad payload encoding") from exc

    header = {k: doc[k] for k in _HEADER_KEYS}
    expected = _content_hash(header, payload)
    if expected != doc["content_hash"]:
        raise CorruptCheckpointError(
            f"{path}: content hash mismatch "
            f"(stored {doc['content_hash'][:12]}, computed {expected[:12]})")

    fingerprint = DataFingerprint(**doc["data_fingerprint"])
    state = _decode_payload(payload)
    if doc["stage"] == "regression":
        spec = RegressorSpec(family=doc["family"],
                             hyperparameters=doc["hyperparameters"],
                             uses_sentiment=doc["uses_sentiment"])
        return FittedRegressor(spec=spec, seed=doc["seed"],
                               fingerprint=fingerprint, state=state)
    if doc["stage"] == "classification":
        spec = ClassifierSpec(family=doc["family"],
                              hyperparameters=doc["hyperparameters"],
                              uses_sentiment=doc["uses_sentiment"])
        return FittedClassifier(spec=spec, seed=doc["seed"],
                                fingerprint=fingerprint, state=state)
    raise CorruptCheckpointError(f"{path}: unknown stage {doc['stage']!r}")

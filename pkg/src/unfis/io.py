"""Model persistence as a self-describing JSON document.

Floats are written with Python's shortest round-trip representation, so a
save/load cycle reproduces every float64 bit for bit.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ModelParams, predict_proba
from .data import Normalization
from .errors import PersistenceError

FORMAT = "unfis-model"
VERSION = 1


@dataclass(frozen=True)
class TrainedModel:
    """Parameters plus everything needed to apply them to raw inputs."""

    params: ModelParams
    normalization: Normalization
    class_names: tuple
    feature_names: tuple
    positive: int = None
    dataset: str = ""

    def predict_proba(self, X_raw):
        return predict_proba(self.params, self.normalization.apply(X_raw))

    def predict(self, X_raw):
        return np.argmax(self.predict_proba(X_raw), axis=1)


def to_document(model):
    p = model.params
    return {
        "format": FORMAT,
        "version": VERSION,
        "dataset": model.dataset,
        "R": p.R,
        "n": p.n,
        "C": p.C,
        "epsilon": p.epsilon,
        "selection_enabled": p.selection,
        "class_names": list(model.class_names),
        "feature_names": list(model.feature_names),
        "positive_class": model.positive,
        "parameters": {
            "centers": p.centers.tolist(),
            "widths": p.widths.tolist(),
            "selection_logits": p.logits.tolist(),
            "consequents": p.consequents.tolist(),
            "thresholds": p.thresholds.tolist(),
        },
        "normalization": {
            "mean": model.normalization.mean.tolist(),
            "scale": model.normalization.scale.tolist(),
        },
    }


def from_document(doc):
    if doc.get("format") != FORMAT:
        raise PersistenceError(f"not an {FORMAT} document")
    if doc.get("version") != VERSION:
        raise PersistenceError(f"unsupported document version {doc.get('version')}")
    try:
        q = doc["parameters"]
        params = ModelParams(
            centers=np.array(q["centers"], dtype=float).reshape(doc["R"], doc["n"]),
            widths=np.array(q["widths"], dtype=float).reshape(doc["R"], doc["n"]),
            logits=np.array(q["selection_logits"], dtype=float).reshape(doc["R"], doc["n"]),
            consequents=np.array(q["consequents"], dtype=float).reshape(doc["R"], doc["C"], doc["n"] + 1),
            thresholds=np.array(q["thresholds"], dtype=float).reshape(doc["C"]),
            selection=bool(doc["selection_enabled"]),
            epsilon=float(doc["epsilon"]),
        )
        norm = Normalization(
            mean=np.array(doc["normalization"]["mean"], dtype=float),
            scale=np.array(doc["normalization"]["scale"], dtype=float),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise PersistenceError(f"malformed model document: {exc}") from exc
    return TrainedModel(
        params=params, normalization=norm, class_names=tuple(doc["class_names"]),
        feature_names=tuple(doc["feature_names"]), positive=doc.get("positive_class"),
        dataset=doc.get("dataset", ""),
    )


def save_model(model, path):
    try:
        Path(path).write_text(json.dumps(to_document(model), indent=1) + "\n")
    except OSError as exc:
        raise PersistenceError(f"cannot write {path}: {exc}") from exc


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise PersistenceError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PersistenceError(f"{path} is not valid JSON: {exc}") from exc
    return from_document(doc)

"""Uniform construction, training and persistence for every classifier kind.

Model container layout (a numpy ``.npz`` archive, all arrays little-endian):

``meta``
    uint8 bytes of a UTF-8 JSON object ``{"format": "ticketclf.model",
    "version": 1, "kind": ..., "params": {...}, ...}``
MLP
    ``W0..W{L-1}`` float64 ``(n_in, n_out)``, ``b0..b{L-1}`` float64 ``(n_out,)``;
    ``meta.layer_sizes`` lists input, hidden and output widths.
SGD / RIDGE
    ``coef`` float64 ``(n_features,)``, ``intercept`` float64 ``(1,)``.
KNN
    ``X_data`` float64, ``X_indices`` int64, ``X_indptr`` int64, ``X_shape``
    int64 ``(2,)`` (CSR training matrix) and ``y`` int64 labels.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import baselines, mlp

KINDS = ("MLP", "SGD", "RIDGE", "KNN")
MODEL_FORMAT = "ticketclf.model"
MODEL_VERSION = 1

_DEFAULT_PARAMS = {
    "MLP": {},
    "SGD": {"loss": "modified_huber", "max_iter": 5000, "seed": 0},
    "RIDGE": {"alpha": 1.0, "seed": 0},
    "KNN": {"n_neighbors": 2, "weighting": "distance"},
}


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown classifier kind {self.kind!r}; expected one of {KINDS}")
        merged = {**_DEFAULT_PARAMS[self.kind], **dict(self.params)}
        if self.kind == "RIDGE" and not merged["alpha"] > 0:
            raise ValueError("ridge alpha must be positive")
        if self.kind == "KNN" and merged["n_neighbors"] < 1:
            raise ValueError("n_neighbors must be >= 1")
        object.__setattr__(self, "params", merged)

    @property
    def name(self) -> str:
        if not self.params or self.params == _DEFAULT_PARAMS[self.kind]:
            return self.kind
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"

    def mlp_params(self) -> mlp.MlpParams:
        return mlp.MlpParams.from_dict(self.params) if self.params else mlp.MlpParams()


def train_classifier(spec: ClassifierSpec, X, y):
    p = spec.params
    if spec.kind == "MLP":
        return mlp.train(X, y, spec.mlp_params())
    if spec.kind == "SGD":
        return baselines.train_sgd(
            X, y, loss=p["loss"], max_iter=p["max_iter"], seed=p["seed"],
            **{k: p[k] for k in ("alpha", "tol") if k in p},
        )
    if spec.kind == "RIDGE":
        return baselines.train_ridge(X, y, alpha=p["alpha"], fit_intercept=p.get("fit_intercept", True))
    return baselines.train_knn(X, y, n_neighbors=p["n_neighbors"], weighting=p["weighting"])


def model_kind(model) -> str:
    return "MLP" if isinstance(model, mlp.MlpModel) else model.kind


def model_arrays(model) -> tuple[dict, dict]:
    """Split a trained model into JSON-able metadata and little-endian arrays."""
    kind = model_kind(model)
    meta = {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": kind}
    arrays = {}
    if kind == "MLP":
        meta["params"] = model.params.to_dict()
        meta["layer_sizes"] = list(model.layer_sizes)
        meta["loss_history"] = list(model.loss_history)
        for i, (W, b) in enumerate(zip(model.weights, model.biases)):
            arrays[f"W{i}"] = W.astype("<f8")
            arrays[f"b{i}"] = b.astype("<f8")
    elif kind in ("SGD", "RIDGE"):
        arrays["coef"] = model.coef.astype("<f8")
        arrays["intercept"] = np.array([model.intercept], dtype="<f8")
    else:
        meta["params"] = {"n_neighbors": model.n_neighbors, "weighting": model.weighting}
        X = model.X
        arrays.update(
            X_data=X.data.astype("<f8"), X_indices=X.indices.astype("<i8"),
            X_indptr=X.indptr.astype("<i8"), X_shape=np.array(X.shape, dtype="<i8"),
            y=model.y.astype("<i8"),
        )
    return meta, arrays


def model_from_arrays(meta: dict, arrays) -> object:
    if meta.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a model container (format={meta.get('format')!r})")
    if meta.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"model container version {meta.get('version')!r} unsupported; expected {MODEL_VERSION}"
        )
    kind = meta.get("kind")
    if kind == "MLP":
        sizes = meta["layer_sizes"]
        n = len(sizes) - 1
        try:
            weights = [np.asarray(arrays[f"W{i}"], dtype=np.float64) for i in range(n)]
            biases = [np.asarray(arrays[f"b{i}"], dtype=np.float64) for i in range(n)]
        except KeyError as exc:
            raise ModelFormatError(f"missing tensor {exc} for layer sizes {sizes}") from exc
        try:
            return mlp.MlpModel(sizes, weights, biases, mlp.MlpParams.from_dict(meta["params"]),
                                list(meta.get("loss_history", [])))
        except ValueError as exc:
            raise ModelFormatError(str(exc)) from exc
    if kind in ("SGD", "RIDGE"):
        return baselines.LinearModel(kind, np.asarray(arrays["coef"], dtype=np.float64),
                                     float(arrays["intercept"][0]))
    if kind == "KNN":
        shape = tuple(int(s) for s in arrays["X_shape"])
        X = sp.csr_matrix((arrays["X_data"], arrays["X_indices"], arrays["X_indptr"]), shape=shape)
        y = np.asarray(arrays["y"], dtype=np.int64)
        if len(y) != shape[0]:
            raise ModelFormatError("KNN label count does not match stored matrix rows")
        return baselines.KnnModel(X, y, **meta["params"])
    raise ModelFormatError(f"unknown model kind {kind!r}")


def _json_bytes(obj) -> np.ndarray:
    return np.frombuffer(json.dumps(obj).encode("utf-8"), dtype=np.uint8)


def read_meta(archive) -> dict:
    return json.loads(bytes(archive["meta"]).decode("utf-8"))


def save_model(model, path) -> None:
    meta, arrays = model_arrays(model)
    buf = io.BytesIO()
    np.savez(buf, meta=_json_bytes(meta), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_model(path):
    with np.load(path, allow_pickle=False) as archive:
        return model_from_arrays(read_meta(archive), archive)

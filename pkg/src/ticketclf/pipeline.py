"""Fitted end-to-end pipeline (vectorizer, chi-square mask, classifier) and its bundle file.

A bundle is a single ``.npz`` archive holding a ``meta`` JSON blob (format tag,
version, the TF-IDF model, classifier metadata) next to the ``mask`` column
indices and the classifier arrays prefixed with ``model/``.  A service can
classify tickets from the bundle alone.
"""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifiers import ClassifierSpec, model_arrays, model_from_arrays, model_kind, train_classifier
from .features import FeatureMask, apply_mask, select_features
from .ingest import BUG, NBUG, Ticket
from .mlp import MlpModel
from .text import PipelineConfig, TfidfModel, fit_transform

BUNDLE_FORMAT = "ticketclf.bundle"
BUNDLE_VERSION = 1


class BundleError(ValueError):
    pass


class BundleVersionError(BundleError):
    pass


@dataclass
class TrainedPipeline:
    tfidf: TfidfModel
    mask: FeatureMask | None
    model: object

    @property
    def version(self) -> str:
        return f"{BUNDLE_FORMAT}/{BUNDLE_VERSION}:{model_kind(self.model)}"

    def features(self, tickets):
        X = self.tfidf.transform(tickets)
        return X if self.mask is None else apply_mask(X, self.mask)

    def predict(self, tickets) -> np.ndarray:
        return self.model.predict(self.features(tickets))

    def predict_proba(self, tickets) -> np.ndarray | None:
        """BUG probabilities, or ``None`` for classifiers without a probabilistic output."""
        if isinstance(self.model, MlpModel):
            return self.model.predict_proba(self.features(tickets))
        return None

    def classify(self, tickets) -> list[dict]:
        tickets = list(tickets)
        labels = self.predict(tickets)
        proba = self.predict_proba(tickets)
        out = []
        for i, t in enumerate(tickets):
            out.append({
                "key": getattr(t, "key", None),
                "label": BUG if labels[i] == 1 else NBUG,
                "probability": None if proba is None else float(proba[i]),
            })
        return out

    def save(self, path) -> None:
        model_meta, arrays = model_arrays(self.model)
        meta = {
            "format": BUNDLE_FORMAT,
            "version": BUNDLE_VERSION,
            "tfidf": self.tfidf.to_dict(),
            "model": model_meta,
            "mask_k": None if self.mask is None else self.mask.k,
            "mask_n_features": None if self.mask is None else self.mask.n_features,
        }
        payload = {f"model/{k}": v for k, v in arrays.items()}
        if self.mask is not None:
            payload["mask"] = self.mask.selected.astype("<i8")
            payload["mask_scores"] = self.mask.scores.astype("<f8")
        buf = io.BytesIO()
        np.savez(buf, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **payload)
        Path(path).write_bytes(buf.getvalue())

    @classmethod
    def load(cls, path) -> "TrainedPipeline":
        with np.load(path, allow_pickle=False) as archive:
            if "meta" not in archive:
                raise BundleError(f"{path}: not a pipeline bundle")
            meta = json.loads(bytes(archive["meta"]).decode("utf-8"))
            if meta.get("format") != BUNDLE_FORMAT:
                raise BundleError(f"{path}: expected format {BUNDLE_FORMAT!r}, found {meta.get('format')!r}")
            if meta.get("version") != BUNDLE_VERSION:
                raise BundleVersionError(
                    f"{path}: bundle version {meta.get('version')!r}, expected {BUNDLE_VERSION}")
            try:
                tfidf = TfidfModel.from_dict(meta["tfidf"])
            except ValueError as exc:
                raise BundleVersionError(f"{path}: {exc}") from exc
            arrays = {k[len("model/"):]: archive[k] for k in archive.files if k.startswith("model/")}
            model = model_from_arrays(meta["model"], arrays)
            mask = None
            if "mask" in archive.files:
                mask = FeatureMask(np.asarray(archive["mask"], dtype=np.int64), int(meta["mask_k"]),
                                   np.asarray(archive["mask_scores"]), int(meta["mask_n_features"]))
        if mask is not None and (mask.n_features != tfidf.n_features
                                 or (len(mask) and mask.selected.max() >= tfidf.n_features)):
            raise BundleError(
                f"{path}: feature mask built for {mask.n_features} columns, vectorizer has {tfidf.n_features}")
        n_in = tfidf.n_features if mask is None else len(mask)
        if model.n_features != n_in:
            raise BundleError(
                f"{path}: classifier expects {model.n_features} inputs, vectorizer yields {n_in}")
        return cls(tfidf, mask, model)


def fit_pipeline(corpus, config: PipelineConfig, n_features: int | None,
                 spec: ClassifierSpec) -> TrainedPipeline:
    """Fit vectorizer, selection and classifier on ``corpus`` only."""
    tfidf, X = fit_transform(corpus, config)
    y = corpus.labels()
    mask, X_sel = select_features(X, y, n_features)
    return TrainedPipeline(tfidf, mask, train_classifier(spec, X_sel, y))


def ticket_from_payload(payload: dict, key: str = "") -> Ticket:
    """Build an unlabeled ticket from ``{"summary": ..., "description": ...}``."""
    if not isinstance(payload, dict):
        raise ValueError("ticket payload must be a JSON object")
    if not isinstance(payload.get("summary"), str):
        raise ValueError("ticket payload needs a string 'summary' field")
    description = payload.get("description") or ""
    if not isinstance(description, str):
        raise ValueError("'description' must be a string")
    return Ticket(key=payload.get("key") or key, summary=payload["summary"], description=description)

"""Chi-square scoring of nonnegative features against the BUG/NBUG label."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

DEFAULT_K = 30_000
SWEEP_GRID = tuple(range(5_000, 60_001, 5_000))


def chi2_scores(X, y) -> np.ndarray:
    """Mass-based chi-square statistic per feature.

    For each feature the observed mass per class is the sum of its values over
    that class's documents; the expected mass is the feature's total mass times
    the class prior.  Features with no mass score 0.
    """
    y = np.asarray(y)
    if X.shape[0] != len(y):
        raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    classes = np.unique(y)
    if len(classes) < 2:
        raise ValueError("chi-square scoring needs both classes in y")
    X = sp.csr_matrix(X, dtype=np.float64)
    if X.nnz and X.data.min() < 0:
        raise ValueError("chi-square scoring requires nonnegative feature values")
    Y = (y[:, None] == classes[None, :]).astype(np.float64)
    observed = np.asarray((X.T @ Y).T)
    priors = Y.mean(axis=0)
    mass = np.asarray(X.sum(axis=0)).ravel()
    expected = np.outer(priors, mass)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return terms.sum(axis=0)


@dataclass(frozen=True)
class FeatureMask:
    selected: np.ndarray
    k: int
    scores: np.ndarray
    n_features: int

    def __len__(self) -> int:
        return len(self.selected)


def select_top_k(scores, k: int) -> FeatureMask:
    """Indices of the ``k`` largest scores, ties going to the lower index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    # stable sort on -score keeps lower indices first among ties
    order = np.argsort(-scores, kind="stable")[: min(k, n)]
    selected = np.sort(order)
    return FeatureMask(selected=selected, k=k, scores=scores[selected], n_features=n)


def apply_mask(X, mask: FeatureMask) -> sp.csr_matrix:
    idx = np.asarray(mask.selected)
    if len(idx) and (idx.max() >= X.shape[1] or idx.min() < 0):
        raise IndexError(f"mask index out of range for matrix with {X.shape[1]} columns")
    return sp.csr_matrix(X)[:, idx].tocsr()


def select_features(X, y, k: int | None) -> tuple[FeatureMask | None, sp.csr_matrix]:
    """Fit a top-``k`` chi-square mask on ``(X, y)``; ``k=None`` keeps every column."""
    if k is None:
        return None, sp.csr_matrix(X)
    mask = select_top_k(chi2_scores(X, y), k)
    return mask, apply_mask(X, mask)


def sweep_feature_counts(X, y, grid: Sequence[int] = SWEEP_GRID, classifiers=None,
                         folds: int = 10, seed: int = 0) -> list[dict]:
    """Cross-validated F1 for every (feature count, classifier) pair.

    Selection is refit inside each training fold.  Returns one row per pair with
    keys ``k``, ``classifier``, ``mean_f1``, ``ci95``, ``fold_f1``.
    """
    from .classifiers import ClassifierSpec
    from .grid_search import cross_validate
    from .metrics import ci95, stratified_kfold

    if classifiers is None:
        classifiers = [ClassifierSpec("MLP")]
    n_cols = X.shape[1]
    splits = stratified_kfold(y, folds, seed)
    rows = []
    for k in grid:
        k_eff = k
        if k > n_cols:
            logger.warning("feature count %d exceeds the %d available; clamping", k, n_cols)
            k_eff = n_cols
        for spec in classifiers:
            fold_metrics = cross_validate(spec, X, y, splits, n_features=k_eff)
            f1s = [m.f1 for m in fold_metrics]
            mean, half = ci95(f1s)
            rows.append({"k": k_eff, "classifier": spec.name, "mean_f1": mean, "ci95": half,
                         "fold_f1": f1s})
    return rows


def format_sweep(rows: Sequence[dict]) -> str:
    lines = ["k\tclassifier\tmean_f1\tci95"]
    lines += [f"{r['k']}\t{r['classifier']}\t{r['mean_f1']:.6f}\t{r['ci95']:.6f}" for r in rows]
    return "\n".join(lines)

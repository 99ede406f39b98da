"""Exhaustive hyper-parameter search scored by k-fold F1."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classifiers import ClassifierSpec, train_classifier
from .features import select_features, apply_mask
from .metrics import Metrics, ci95, compute_metrics, stratified_kfold

logger = logging.getLogger(__name__)

# Reconstructed candidate lists; each contains the reported winning value.
DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "MLP": {
        "activation": ["relu", "tanh"],
        "learning_rate_policy": ["constant", "adaptive"],
        "max_iter": [100, 200],
        "seed": [0],
    },
    "SGD": {"loss": ["logistic", "modified_huber"], "max_iter": [1000, 5000], "seed": [0]},
    "RIDGE": {"alpha": [0.1, 1.0, 10.0], "seed": [0]},
    "KNN": {"n_neighbors": [2, 5, 10], "weighting": ["uniform", "distance"]},
}


def cartesian(grid: Mapping[str, Sequence]) -> list[dict]:
    """Every assignment of the grid, parameter names sorted, last name varying fastest."""
    names = sorted(grid)
    for name in names:
        if len(grid[name]) == 0:
            raise ValueError(f"empty candidate list for {name!r}")
    return [dict(zip(names, values)) for values in itertools.product(*(grid[n] for n in names))]


def cross_validate(spec: ClassifierSpec, X, y, splits, n_features: int | None = None) -> list[Metrics]:
    """Per-fold metrics; chi-square selection (if any) is fit on each training fold."""
    y = np.asarray(y)
    out = []
    for train_idx, test_idx in splits:
        mask, X_train = select_features(X[train_idx], y[train_idx], n_features)
        X_test = X[test_idx] if mask is None else apply_mask(X[test_idx], mask)
        model = train_classifier(spec, X_train, y[train_idx])
        out.append(compute_metrics(y[test_idx], model.predict(X_test)))
    return out


@dataclass
class GridRow:
    index: int
    params: dict
    fold_f1: list[float]
    mean_f1: float
    ci95: float
    error: str | None = None


@dataclass
class GridSearchResult:
    kind: str
    best_params: dict
    best_score: float
    table: list[GridRow]

    def format(self) -> str:
        lines = ["index\tassignment\tfold_f1\tmean_f1\tci95"]
        for r in self.table:
            assignment = ",".join(f"{k}={v}" for k, v in r.params.items())
            folds = ",".join(f"{f:.6f}" for f in r.fold_f1) if r.error is None else f"FAILED: {r.error}"
            lines.append(f"{r.index}\t{assignment}\t{folds}\t{r.mean_f1:.6f}\t{r.ci95:.6f}")
        return "\n".join(lines)


def grid_search(kind: str, grid: Mapping[str, Sequence] | None, X, y, k: int = 10, seed: int = 0,
                n_features: int | None = None) -> GridSearchResult:
    """Score every assignment on shared stratified folds; keep the first best."""
    if k < 2:
        raise ValueError("need at least 2 folds")
    grid = DEFAULT_GRIDS[kind] if grid is None else grid
    splits = stratified_kfold(y, k, seed)
    table = []
    for i, params in enumerate(cartesian(grid)):
        try:
            f1s = [m.f1 for m in cross_validate(ClassifierSpec(kind, params), X, y, splits, n_features)]
            mean, half = ci95(f1s)
            table.append(GridRow(i, params, f1s, mean, half))
        except Exception as exc:  # a failing combination is recorded, not fatal
            logger.warning("grid assignment %s failed: %s", params, exc)
            table.append(GridRow(i, params, [], -math.inf, math.nan, str(exc)))
    best = max(table, key=lambda r: (r.mean_f1, -r.index))
    return GridSearchResult(kind, best.params, best.mean_f1, table)

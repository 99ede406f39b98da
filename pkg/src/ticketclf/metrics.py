"""Stratified folds, confusion-matrix metrics (BUG positive) and fold CIs."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

Z95 = 1.96


def _binary(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.dtype.kind in "US" or arr.dtype == object:
        bad = set(arr.tolist()) - {"BUG", "NBUG"}
        if bad:
            raise ValueError(f"labels must be BUG/NBUG, got {sorted(bad)}")
        return (arr == "BUG").astype(np.int64)
    arr = arr.astype(np.int64)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("labels must be binary (0/1)")
    return arr


def stratified_kfold(y, k: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified ``k``-fold split as ``(train_idx, test_idx)`` pairs.

    Each class is shuffled, the classes are laid end to end and positions are
    dealt round-robin to folds, so every fold holds floor or ceil of each
    class's share and fold sizes differ by at most one.
    """
    if k < 2:
        raise ValueError("need at least 2 folds")
    y = _binary(y)
    rng = np.random.default_rng(seed)
    sequence = []
    for c in (1, 0):
        members = np.flatnonzero(y == c)
        if len(members) < k:
            raise ValueError(f"class {'BUG' if c else 'NBUG'} has {len(members)} members, fewer than k={k}")
        sequence.append(rng.permutation(members))
    sequence = np.concatenate(sequence)
    fold_of = np.empty(len(y), dtype=np.int64)
    fold_of[sequence] = np.arange(len(sequence)) % k
    all_idx = np.arange(len(y))
    return [(all_idx[fold_of != f], all_idx[fold_of == f]) for f in range(k)]


def train_test_split(y, train_fraction: float = 0.75, seed: int = 0):
    """Stratified single split; each class contributes ``round(fraction * n_c)`` to train."""
    y = _binary(y)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in (1, 0):
        members = rng.permutation(np.flatnonzero(y == c))
        cut = int(round(train_fraction * len(members)))
        cut = min(max(cut, 1), len(members) - 1) if len(members) > 1 else cut
        train.append(members[:cut])
        test.append(members[cut:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def confusion(self) -> tuple[int, int, int, int]:
        return self.tp, self.fp, self.tn, self.fn

    def to_dict(self) -> dict:
        return asdict(self)


def f1_from(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)


def metrics_from_confusion(tp: int, fp: int, tn: int, fn: int) -> Metrics:
    total = tp + fp + tn + fn
    if total == 0:
        raise ValueError("empty confusion matrix")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return Metrics(precision, recall, f1_from(precision, recall), (tp + tn) / total,
                   int(tp), int(fp), int(tn), int(fn))


def compute_metrics(y_true, y_pred) -> Metrics:
    t, p = _binary(y_true), _binary(y_pred)
    if len(t) != len(p):
        raise ValueError("y_true and y_pred differ in length")
    if len(t) == 0:
        raise ValueError("cannot compute metrics on empty input")
    tp = int(np.sum((t == 1) & (p == 1)))
    fp = int(np.sum((t == 0) & (p == 1)))
    tn = int(np.sum((t == 0) & (p == 0)))
    fn = int(np.sum((t == 1) & (p == 0)))
    return metrics_from_confusion(tp, fp, tn, fn)


def ci95(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width ``1.96 * s / sqrt(n)``."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        raise ValueError("need at least 2 values for a confidence interval")
    return float(v.mean()), float(Z95 * v.std(ddof=1) / math.sqrt(len(v)))

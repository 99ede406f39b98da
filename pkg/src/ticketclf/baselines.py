"""Reference classifiers: linear SGD, ridge regression and k-nearest neighbors.

Every model predicts 1 (BUG) or 0 (NBUG); score ties resolve to BUG.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit


def _check_two_classes(y):
    y = np.asarray(y).ravel()
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    return y


def _as_matrix(X):
    return sp.csr_matrix(X, dtype=np.float64) if sp.issparse(X) else np.asarray(X, dtype=np.float64)


def _signed(y) -> np.ndarray:
    return np.where(np.asarray(y) == 1, 1.0, -1.0)


# -- loss functions on the margin m = y * score, labels in {-1, +1} -----------

def logistic_loss(m):
    return np.logaddexp(0.0, -m)


def logistic_dloss(m):
    """d loss / d margin."""
    return -expit(-m)


def modified_huber_loss(m):
    """Quadratically smoothed hinge: ``max(0, 1-m)^2`` for ``m >= -1``, ``-4m`` below."""
    m = np.asarray(m, dtype=np.float64)
    return np.where(m >= -1.0, np.maximum(0.0, 1.0 - m) ** 2, -4.0 * m)


def modified_huber_dloss(m):
    m = np.asarray(m, dtype=np.float64)
    return np.where(m >= 1.0, 0.0, np.where(m >= -1.0, -2.0 * (1.0 - m), -4.0))


LOSSES = {
    "logistic": (logistic_loss, logistic_dloss),
    "modified_huber": (modified_huber_loss, modified_huber_dloss),
}


@dataclass
class LinearModel:
    kind: str
    coef: np.ndarray
    intercept: float

    @property
    def n_features(self) -> int:
        return len(self.coef)

    def decision_function(self, X) -> np.ndarray:
        X = _as_matrix(X)
        if X.shape[1] != len(self.coef):
            raise ValueError(f"model expects {len(self.coef)} features, got {X.shape[1]}")
        return np.asarray(X @ self.coef).ravel() + self.intercept

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0).astype(np.int64)


def train_sgd(X, y, loss: str = "modified_huber", alpha: float = 1e-4, max_iter: int = 5000,
              tol: float = 1e-3, n_iter_no_change: int = 5, seed: int = 0) -> LinearModel:
    """Per-sample SGD on an L2-regularized linear model.

    Step size follows ``1 / (alpha * (t0 + t))``; stops early once the epoch
    loss has failed to improve by ``tol`` for ``n_iter_no_change`` epochs.
    """
    if loss not in LOSSES:
        raise ValueError(f"loss must be one of {sorted(LOSSES)}")
    y = _check_two_classes(y)
    X = sp.csr_matrix(X, dtype=np.float64)
    ys = _signed(y)
    loss_fn, dloss_fn = LOSSES[loss]
    n, d = X.shape

    typw = np.sqrt(1.0 / np.sqrt(alpha))
    eta0 = typw / max(1.0, abs(float(dloss_fn(-typw))))
    t0 = 1.0 / (eta0 * alpha)

    w = np.zeros(d)
    wscale = 1.0
    b = 0.0
    t = 1.0
    rng = np.random.default_rng(seed)
    best = np.inf
    stalled = 0
    indptr, indices, data = X.indptr, X.indices, X.data
    for _ in range(max_iter):
        total = 0.0
        for i in rng.permutation(n):
            lo, hi = indptr[i], indptr[i + 1]
            cols, vals = indices[lo:hi], data[lo:hi]
            score = wscale * float(w[cols] @ vals) + b
            m = ys[i] * score
            total += float(loss_fn(m))
            eta = 1.0 / (alpha * (t0 + t))
            g = float(dloss_fn(m)) * ys[i]
            wscale *= 1.0 - eta * alpha
            if g != 0.0:
                w[cols] -= (eta * g / wscale) * vals
                b -= eta * g * 0.01
            if wscale < 1e-9:
                w *= wscale
                wscale = 1.0
            t += 1.0
        epoch_loss = total / n + 0.5 * alpha * wscale ** 2 * float(w @ w)
        if epoch_loss > best - tol:
            stalled += 1
        else:
            stalled = 0
        best = min(best, epoch_loss)
        if stalled >= n_iter_no_change:
            break
    return LinearModel("SGD", w * wscale, b)


def train_ridge(X, y, alpha: float = 1.0, fit_intercept: bool = True) -> LinearModel:
    """Least squares on +/-1 targets with penalty ``alpha * ||w||^2``.

    Solves the primal normal equations when features are fewer than samples and
    the dual (kernel) system otherwise; ``alpha > 0`` keeps either well posed.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    y = _check_two_classes(y)
    t = _signed(y)
    sparse_in = sp.issparse(X)
    X = sp.csr_matrix(X, dtype=np.float64) if sparse_in else np.asarray(X, dtype=np.float64)
    n, d = X.shape
    x_mean = np.asarray(X.mean(axis=0)).ravel() if fit_intercept else np.zeros(d)
    t_mean = t.mean() if fit_intercept else 0.0
    tc = t - t_mean

    if d <= n:
        XtX = X.T @ X
        XtX = XtX.toarray() if sp.issparse(XtX) else np.asarray(XtX)
        XtX = XtX - n * np.outer(x_mean, x_mean)
        rhs = np.asarray(X.T @ tc).ravel() - x_mean * tc.sum()
        w = np.linalg.solve(XtX + alpha * np.eye(d), rhs)
    else:
        K = X @ X.T
        K = K.toarray() if sp.issparse(K) else np.asarray(K)
        if fit_intercept:
            H = np.eye(n) - 1.0 / n
            K = H @ K @ H
        a = np.linalg.solve(K + alpha * np.eye(n), tc)
        w = np.asarray(X.T @ a).ravel() - x_mean * a.sum()
    b = float(t_mean - x_mean @ w)
    return LinearModel("RIDGE", w, b)


@dataclass
class KnnModel:
    X: sp.csr_matrix
    y: np.ndarray
    n_neighbors: int = 2
    weighting: str = "distance"
    kind: str = "KNN"

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def distances(self, X) -> np.ndarray:
        X = sp.csr_matrix(X, dtype=np.float64)
        if X.shape[1] != self.X.shape[1]:
            raise ValueError(f"model expects {self.X.shape[1]} features, got {X.shape[1]}")
        q = np.asarray(X.multiply(X).sum(axis=1)).ravel()
        r = np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()
        cross = np.asarray((X @ self.X.T).todense())
        d2 = q[:, None] + r[None, :] - 2.0 * cross
        # cancellation noise around exact duplicates
        d2[d2 <= 1e-12 * (q[:, None] + r[None, :] + 1.0)] = 0.0
        return np.sqrt(d2)

    def predict(self, X) -> np.ndarray:
        D = self.distances(X)
        k = min(self.n_neighbors, D.shape[1])
        out = np.empty(D.shape[0], dtype=np.int64)
        for i, row in enumerate(D):
            nn = np.argsort(row, kind="stable")[:k]
            dist, lab = row[nn], self.y[nn]
            if self.weighting == "distance":
                exact = dist == 0.0
                w = exact.astype(np.float64) if exact.any() else 1.0 / dist
            else:
                w = np.ones(k)
            bug = w[lab == 1].sum()
            nbug = w[lab == 0].sum()
            out[i] = 1 if bug >= nbug else 0
        return out


def train_knn(X, y, n_neighbors: int = 2, weighting: str = "distance") -> KnnModel:
    if n_neighbors < 1:
        raise ValueError("n_neighbors must be >= 1")
    if weighting not in ("uniform", "distance"):
        raise ValueError("weighting must be 'uniform' or 'distance'")
    y = _check_two_classes(y)
    return KnnModel(sp.csr_matrix(X, dtype=np.float64), y.astype(np.int64), n_neighbors, weighting)

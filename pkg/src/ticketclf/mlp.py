"""Multi-layer perceptron with a single logistic output unit, in plain numpy.

Inputs may be dense arrays or scipy sparse matrices; only the first layer
ever touches the input, so sparse TF-IDF rows are multiplied directly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

logger = logging.getLogger(__name__)

ACTIVATIONS = ("tanh", "relu", "logistic")
LR_POLICIES = ("constant", "adaptive")
SOLVERS = ("sgd", "adam")

_PROB_EPS = 1e-15


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training loss became non-finite ({loss}) at epoch {epoch}")


@dataclass(frozen=True)
class MlpParams:
    hidden_layers: tuple[int, ...] = (100,)
    activation: str = "tanh"
    learning_rate_policy: str = "adaptive"
    initial_lr: float = 0.001
    momentum: float = 0.9
    max_iter: int = 100
    batch_size: int = 200
    tol: float = 1e-4
    seed: int = 0
    solver: str = "adam"

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        if any(h < 1 for h in self.hidden_layers):
            raise ValueError("hidden layer sizes must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.learning_rate_policy not in LR_POLICIES:
            raise ValueError(f"learning_rate_policy must be one of {LR_POLICIES}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        if not self.initial_lr > 0:
            raise ValueError("initial_lr must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_dict(self) -> dict:
        return {
            "hidden_layers": list(self.hidden_layers),
            "activation": self.activation,
            "learning_rate_policy": self.learning_rate_policy,
            "initial_lr": self.initial_lr,
            "momentum": self.momentum,
            "max_iter": self.max_iter,
            "batch_size": self.batch_size,
            "tol": self.tol,
            "seed": self.seed,
            "solver": self.solver,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpParams":
        d = dict(d)
        if "hidden_layers" in d:
            d["hidden_layers"] = tuple(d["hidden_layers"])
        return cls(**d)


# The reference framework's MLPClassifier defaults.
FRAMEWORK_DEFAULTS = MlpParams(
    hidden_layers=(100,), activation="relu", learning_rate_policy="constant",
    max_iter=200, solver="adam",
)
# Grid-search winner: activation='tanh', learning_rate='adaptive', max_iter=100, random_state=0.
GRID_SEARCH_BEST = MlpParams(
    hidden_layers=(100,), activation="tanh", learning_rate_policy="adaptive",
    max_iter=100, seed=0, solver="adam",
)


@dataclass
class MlpModel:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    params: MlpParams
    loss_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ValueError("number of weight/bias tensors does not match layer sizes")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[i], self.layer_sizes[i + 1])
            if W.shape != shape or b.shape != (shape[1],):
                raise ValueError(
                    f"layer {i}: expected W{shape} and b({shape[1]},), got W{W.shape} b{b.shape}"
                )
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i} has non-finite parameters")

    @property
    def n_features(self) -> int:
        return self.layer_sizes[0]

    def predict_proba(self, X) -> np.ndarray:
        return forward(self, X)

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return predict(self, X, threshold)


def init_model(n_features: int, params: MlpParams) -> MlpModel:
    """Glorot-uniform weights, zero biases, fully determined by ``params.seed``."""
    if n_features < 1:
        raise ValueError("n_features must be >= 1")
    rng = np.random.default_rng(params.seed)
    sizes = (n_features, *params.hidden_layers, 1)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(sizes, weights, biases, params)


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    return expit(z)


def _activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0).astype(np.float64)
    return a * (1.0 - a)


def _check_input(model: MlpModel, X):
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"model expects {model.n_features} input features, got shape {X.shape}")
    return X if sp.issparse(X) else np.asarray(X, dtype=np.float64)


def _forward_pass(model: MlpModel, X):
    """Pre-activations and activations of every hidden layer, plus output logits."""
    act = model.params.activation
    zs, acts = [], [X]
    a = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        z = np.asarray(a @ W) + b
        a = _activate(act, z)
        zs.append(z)
        acts.append(a)
    logits = (np.asarray(a @ model.weights[-1]) + model.biases[-1]).ravel()
    return zs, acts, logits


def forward(model: MlpModel, X) -> np.ndarray:
    """BUG probability for every row of ``X``, clipped into the open interval (0, 1)."""
    X = _check_input(model, X)
    _, _, logits = _forward_pass(model, X)
    return np.clip(expit(logits), _PROB_EPS, 1.0 - _PROB_EPS)


def _bce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))


def loss_and_grad(model: MlpModel, X, y):
    """Mean binary cross-entropy and its gradients.

    Returns ``(loss, weight_grads, bias_grads)`` with shapes matching the model.
    """
    X = _check_input(model, X)
    y = np.asarray(y, dtype=np.float64).ravel()
    n = X.shape[0]
    act = model.params.activation
    zs, acts, logits = _forward_pass(model, X)
    loss = _bce_from_logits(logits, y)

    delta = ((expit(logits) - y) / n)[:, None]
    n_layers = len(model.weights)
    w_grads = [None] * n_layers
    b_grads = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        a_prev = acts[i]
        w_grads[i] = np.asarray(a_prev.T @ delta)
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * _activation_grad(act, zs[i - 1], acts[i])
    return loss, w_grads, b_grads


class _Sgd:
    def __init__(self, shapes, lr: float, momentum: float):
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        for p, g, v in zip(params, grads, self.velocity):
            v *= self.momentum
            v -= self.lr * g
            p += v


class _Adam:
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    def __init__(self, shapes, lr: float):
        self.lr = lr
        self.t = 0
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        lr_t = self.lr * np.sqrt(1 - b2 ** self.t) / (1 - b1 ** self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= lr_t * m / (np.sqrt(v) + self.eps)


def train(X, y, params: MlpParams, init: MlpModel | None = None) -> MlpModel:
    """Mini-batch training with seeded per-epoch shuffling.

    Under the adaptive policy the learning rate is divided by 5 whenever two
    consecutive epochs fail to improve the best epoch loss by ``tol``.  Training
    always runs ``max_iter`` epochs.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(np.unique(y)) < 2:
        raise ValueError("training data must contain both classes")
    if X.shape[0] != len(y):
        raise ValueError(f"X has {X.shape[0]} rows but y has {len(y)} labels")
    X = sp.csr_matrix(X, dtype=np.float64) if sp.issparse(X) else np.asarray(X, dtype=np.float64)

    model = init if init is not None else init_model(X.shape[1], params)
    model = MlpModel(
        model.layer_sizes,
        [W.copy() for W in model.weights],
        [b.copy() for b in model.biases],
        params,
        [],
    )
    tensors = model.weights + model.biases
    shapes = [t.shape for t in tensors]
    if params.solver == "sgd":
        opt = _Sgd(shapes, params.initial_lr, params.momentum)
    else:
        opt = _Adam(shapes, params.initial_lr)

    rng = np.random.default_rng(params.seed + 1)
    n = X.shape[0]
    batch = min(params.batch_size, n)
    best = np.inf
    stalled = 0
    for epoch in range(params.max_iter):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, wg, bg = loss_and_grad(model, X[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss)
            total += loss * len(idx)
            opt.step(tensors, wg + bg)
        epoch_loss = total / n
        if not np.isfinite(epoch_loss):
            raise TrainingDivergedError(epoch, epoch_loss)
        model.loss_history.append(epoch_loss)

        if epoch_loss > best - params.tol:
            stalled += 1
        else:
            stalled = 0
        best = min(best, epoch_loss)
        if params.learning_rate_policy == "adaptive" and stalled >= 2:
            opt.lr /= 5.0
            stalled = 0
            logger.debug("epoch %d: learning rate reduced to %g", epoch, opt.lr)
    return model


def predict(model: MlpModel, X, threshold: float = 0.5) -> np.ndarray:
    """1 (BUG) where the BUG probability is at least ``threshold``."""
    return (forward(model, X) >= threshold).astype(np.int64)


def with_layers(params: MlpParams, layers) -> MlpParams:
    return replace(params, hidden_layers=tuple(layers))

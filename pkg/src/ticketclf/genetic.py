"""Genetic search over MLP input width and hidden-layer structure.

A chromosome is ``(n_features, layers)``; fitness is the F1 of an MLP trained
on a fixed stratified 75% split and scored on the remaining 25%, using the
``n_features`` best chi-square columns of the training split.
"""
from __future__ import annotations

import json
import logging
import math
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .features import chi2_scores
from .metrics import compute_metrics, train_test_split
from .mlp import GRID_SEARCH_BEST, MlpParams, TrainingDivergedError, train

logger = logging.getLogger(__name__)

ADDITION, DELETION, SUBSTITUTION = 0, 1, 2


@dataclass(frozen=True)
class GaBounds:
    n_features: tuple[int, int] = (20_000, 60_000)
    n_layers: tuple[int, int] = (2, 15)
    layer_size: tuple[int, int] = (1, 30)

    def __post_init__(self):
        for name in ("n_features", "n_layers", "layer_size"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"invalid {name} bounds {(lo, hi)}")

    def contains(self, ind: "Individual") -> bool:
        return (
            self.n_features[0] <= ind.n_features <= self.n_features[1]
            and self.n_layers[0] <= len(ind.layers) <= self.n_layers[1]
            and all(self.layer_size[0] <= s <= self.layer_size[1] for s in ind.layers)
        )


@dataclass(frozen=True)
class Individual:
    n_features: int
    layers: tuple[int, ...]
    fitness: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_features", int(self.n_features))
        object.__setattr__(self, "layers", tuple(int(s) for s in self.layers))

    @property
    def chromosome(self) -> tuple[int, tuple[int, ...]]:
        return self.n_features, self.layers

    def __str__(self) -> str:
        return f"i({self.n_features}, ({', '.join(map(str, self.layers))}))"

    def to_dict(self) -> dict:
        return {"n_features": self.n_features, "hidden_layers": list(self.layers),
                "fitness": self.fitness}


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    generations: int = 150
    p_ret: float = 0.20
    p_mut: float = 0.1
    p_sel: float = 0.3
    bounds: GaBounds = field(default_factory=GaBounds)
    seed: int = 0
    eval_split: float = 0.75
    mlp_params: MlpParams = GRID_SEARCH_BEST

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0 < self.p_ret < 1:
            raise ValueError("p_ret must be in (0, 1)")
        if not 0 <= self.p_mut <= 1 or not 0 <= self.p_sel <= 1:
            raise ValueError("p_mut and p_sel must be in [0, 1]")
        if not 0 < self.eval_split < 1:
            raise ValueError("eval_split must be in (0, 1)")


def _uniform_int(rng, lo: int, hi: int) -> int:
    return int(rng.integers(lo, hi + 1))


def random_individual(bounds: GaBounds, rng) -> Individual:
    n_features = _uniform_int(rng, *bounds.n_features)
    n_layers = _uniform_int(rng, *bounds.n_layers)
    layers = tuple(_uniform_int(rng, *bounds.layer_size) for _ in range(n_layers))
    return Individual(n_features, layers)


@dataclass
class FitnessData:
    """The fixed train/test split every individual is scored on."""

    X_train: sp.csr_matrix
    y_train: np.ndarray
    X_test: sp.csr_matrix
    y_test: np.ndarray
    ranking: np.ndarray  # column indices by decreasing chi-square on the training split

    @classmethod
    def build(cls, X, y, train_fraction: float = 0.75, seed: int = 0) -> "FitnessData":
        X = sp.csr_matrix(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        train_idx, test_idx = train_test_split(y, train_fraction, seed)
        scores = chi2_scores(X[train_idx], y[train_idx])
        ranking = np.argsort(-scores, kind="stable")
        return cls(X[train_idx], y[train_idx], X[test_idx], y[test_idx], ranking)

    @property
    def n_columns(self) -> int:
        return self.X_train.shape[1]

    def columns(self, k: int) -> np.ndarray:
        return np.sort(self.ranking[:min(k, self.n_columns)])


def individual_seed(ind: Individual, base_seed: int) -> int:
    """Training seed that depends only on the chromosome and the run seed."""
    tag = zlib.crc32(repr(ind.chromosome).encode("ascii"))
    return (base_seed * 1_000_003 + tag) % (2 ** 32)


def evaluate_fitness(ind: Individual, features, cfg: GaConfig) -> Individual:
    """Return ``ind`` with its held-out F1 attached.

    ``features`` is a :class:`FitnessData` or an ``(X, y)`` pair.
    """
    data = features if isinstance(features, FitnessData) else FitnessData.build(
        *features, train_fraction=cfg.eval_split, seed=cfg.seed)
    if ind.n_features > data.n_columns:
        logger.debug("%s asks for %d features, only %d available", ind, ind.n_features, data.n_columns)
    cols = data.columns(ind.n_features)
    params = replace(cfg.mlp_params, hidden_layers=ind.layers, seed=individual_seed(ind, cfg.seed))
    try:
        model = train(data.X_train[:, cols], data.y_train, params)
        f1 = compute_metrics(data.y_test, model.predict(data.X_test[:, cols])).f1
    except TrainingDivergedError as exc:
        logger.warning("%s diverged (%s); fitness set to 0", ind, exc)
        f1 = 0.0
    return replace(ind, fitness=float(f1))


def _ranked(population):
    # stable: equal fitness keeps population order
    return sorted(population, key=lambda ind: -ind.fitness)


def select_parents(population, cfg: GaConfig, rng) -> list[Individual]:
    """Elites (top ``ceil(p_ret * N)``) plus each other individual with probability ``p_sel``."""
    if any(ind.fitness is None for ind in population):
        raise ValueError("every individual must be evaluated before selection")
    ranked = _ranked(population)
    n_keep = min(len(ranked), math.ceil(cfg.p_ret * len(ranked) - 1e-9))
    pool = ranked[:n_keep]
    pool += [ind for ind in ranked[n_keep:] if rng.random() < cfg.p_sel]
    for ind in ranked:
        if len(pool) >= 2:
            break
        if not any(ind is p for p in pool):
            pool.append(ind)
    return pool


def crossover(a: Individual, b: Individual, bounds: GaBounds | None = None) -> Individual:
    """Mean feature count; first half of ``a``'s layers then second half of ``b``'s."""
    n_features = (a.n_features + b.n_features) // 2
    layers = a.layers[: len(a.layers) // 2] + b.layers[len(b.layers) // 2:]
    if bounds is not None:
        layers = layers[: bounds.n_layers[1]]
        lo, hi = bounds.n_features
        n_features = min(max(n_features, lo), hi)
    return Individual(n_features, layers)


def add_layer(ind: Individual, size: int) -> Individual:
    return Individual(ind.n_features, ind.layers + (size,))


def delete_layer(ind: Individual, index: int) -> Individual:
    return Individual(ind.n_features, ind.layers[:index] + ind.layers[index + 1:])


def substitute_layer(ind: Individual, index: int, size: int) -> Individual:
    layers = list(ind.layers)
    layers[index] = size
    return Individual(ind.n_features, tuple(layers))


def _feasible(kind: int, ind: Individual, bounds: GaBounds) -> bool:
    if kind == ADDITION:
        return len(ind.layers) < bounds.n_layers[1]
    if kind == DELETION:
        return len(ind.layers) > bounds.n_layers[0]
    return len(ind.layers) > 0


def mutate(ind: Individual, cfg: GaConfig, rng) -> Individual:
    """With probability ``p_mut`` apply one of addition, deletion or substitution.

    A kind that would break the layer-count bounds is re-rolled once among the
    other two; if that is infeasible too the individual is returned unchanged.
    """
    if rng.random() >= cfg.p_mut:
        return ind
    bounds = cfg.bounds
    kind = int(rng.integers(3))
    if not _feasible(kind, ind, bounds):
        others = [k for k in (ADDITION, DELETION, SUBSTITUTION) if k != kind]
        kind = others[int(rng.integers(2))]
        if not _feasible(kind, ind, bounds):
            return ind
    if kind == ADDITION:
        return add_layer(ind, _uniform_int(rng, *bounds.layer_size))
    if kind == DELETION:
        return delete_layer(ind, int(rng.integers(len(ind.layers))))
    size = _uniform_int(rng, *bounds.layer_size)
    return substitute_layer(ind, int(rng.integers(len(ind.layers))), size)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best: float
    mean: float
    min: float
    best_ever: float
    best_individual: Individual


@dataclass
class GaResult:
    best: Individual
    history: list[GenerationRecord]
    populations: list[list[Individual]]
    config: GaConfig

    def best_fitness_history(self) -> list[float]:
        return [r.best_ever for r in self.history]

    def format_log(self) -> str:
        lines = ["generation\tbest\tmean\tmin\tbest_ever\tbest_individual"]
        for r in self.history:
            lines.append(f"{r.generation}\t{r.best:.6f}\t{r.mean:.6f}\t{r.min:.6f}\t"
                         f"{r.best_ever:.6f}\t{r.best_individual}")
        return "\n".join(lines)

    def save_best(self, path) -> None:
        """Write the winning chromosome as a reusable MLP training configuration."""
        params = replace(self.config.mlp_params, hidden_layers=self.best.layers)
        payload = {"individual": self.best.to_dict(), "n_features": self.best.n_features,
                   "mlp_params": params.to_dict()}
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_best(path) -> tuple[Individual, MlpParams]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    ind = payload["individual"]
    return (Individual(ind["n_features"], tuple(ind["hidden_layers"]), ind.get("fitness")),
            MlpParams.from_dict(payload["mlp_params"]))


def evolve(X, y, cfg: GaConfig,
           on_generation: Callable[[GenerationRecord], None] | None = None) -> GaResult:
    rng = np.random.default_rng(cfg.seed)
    data = FitnessData.build(X, y, cfg.eval_split, cfg.seed)
    cache: dict = {}

    def evaluate(ind: Individual) -> Individual:
        if ind.fitness is not None:
            return ind
        if ind.chromosome not in cache:
            cache[ind.chromosome] = evaluate_fitness(ind, data, cfg).fitness
        return replace(ind, fitness=cache[ind.chromosome])

    population = [evaluate(random_individual(cfg.bounds, rng)) for _ in range(cfg.population_size)]
    history: list[GenerationRecord] = []
    populations: list[list[Individual]] = []
    best_ever = None

    def record(gen: int):
        nonlocal best_ever
        fits = np.array([ind.fitness for ind in population])
        gen_best = _ranked(population)[0]
        if best_ever is None or gen_best.fitness > best_ever.fitness:
            best_ever = gen_best
        rec = GenerationRecord(gen, float(fits.max()), float(fits.mean()), float(fits.min()),
                               float(best_ever.fitness), gen_best)
        history.append(rec)
        populations.append(list(population))
        logger.info("generation %d: best %.4f mean %.4f best-ever %s", gen, rec.best, rec.mean, best_ever)
        if on_generation is not None:
            on_generation(rec)

    record(0)
    for gen in range(1, cfg.generations + 1):
        pool = select_parents(population, cfg, rng)
        children = []
        while len(pool) + len(children) < cfg.population_size:
            i, j = rng.choice(len(pool), size=2, replace=False)
            child = crossover(pool[int(i)], pool[int(j)], cfg.bounds)
            children.append(mutate(child, cfg, rng))
        population = pool + [evaluate(c) for c in children]
        record(gen)
    return GaResult(best_ever, history, populations, cfg)

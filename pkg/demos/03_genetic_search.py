"""Evolve the feature count and hidden layer sizes of the perceptron.

A small population and few generations keep this to well under a minute.
Run with ``python demos/03_genetic_search.py``.
"""
import numpy as np

from ticketclf.genetic import GaBounds, GaConfig, Individual, crossover, evolve, mutate
from ticketclf.synthetic import make_corpus
from ticketclf.text import PipelineConfig, fit_transform

# The operators on their own.
a = Individual(21912, (12, 23, 8, 4))
b = Individual(30023, (4, 23, 5, 13, 27))
print("crossover:", a, "x", b, "->", crossover(a, b))
rng = np.random.default_rng(3)
print("mutation: ", a, "->", mutate(a, GaConfig(p_mut=1.0), rng))

corpus = make_corpus(240, seed=2)
_, X = fit_transform(corpus, PipelineConfig())
y = corpus.labels()

bounds = GaBounds(n_features=(50, min(2000, X.shape[1])), layer_size=(2, 16), n_layers=(1, 4))
cfg = GaConfig(population_size=8, generations=4, bounds=bounds, seed=0)
result = evolve(X, y, cfg)
print()
print(result.format_log())
print("best:", result.best, f"fitness {result.best.fitness:.4f}")

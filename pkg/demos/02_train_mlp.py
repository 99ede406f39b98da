"""Train the perceptron on TF-IDF features and compare it with the baselines.

Run with ``python demos/02_train_mlp.py``.
"""
from ticketclf.classifiers import ClassifierSpec
from ticketclf.grid_search import cross_validate
from ticketclf.metrics import ci95, stratified_kfold
from ticketclf.mlp import GRID_SEARCH_BEST
from ticketclf.synthetic import make_corpus
from ticketclf.text import PipelineConfig, fit_transform

corpus = make_corpus(300, seed=1)
_, X = fit_transform(corpus, PipelineConfig())
y = corpus.labels()
splits = stratified_kfold(y, 5, seed=0)
print(f"{X.shape[0]} tickets, {X.shape[1]} features, {int(y.sum())} bugs")

specs = [
    ClassifierSpec("MLP", GRID_SEARCH_BEST.to_dict()),
    ClassifierSpec("SGD", {"loss": "modified_huber"}),
    ClassifierSpec("RIDGE", {"alpha": 1.0}),
    ClassifierSpec("KNN", {"n_neighbors": 2, "weighting": "distance"}),
]
# Selection is refit on each training fold.  Masked rows are not
# re-normalized, so with 500 features the short NBUG rows sit close to
# everything and distance-based kNN collapses to predicting NBUG.
for n_features in (None, 500):
    print(f"\nfeatures: {'all' if n_features is None else n_features}")
    for spec in specs:
        folds = cross_validate(spec, X, y, splits, n_features=n_features)
        mean, half = ci95([m.f1 for m in folds])
        print(f"  {spec.kind:6s} F1 {mean:.3f} +/- {half:.3f}")

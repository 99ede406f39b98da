import math

import pytest

from ticketclf.grid_search import DEFAULT_GRIDS, cartesian, grid_search
from ticketclf.mlp import GRID_SEARCH_BEST
from ticketclf.synthetic import make_corpus
from ticketclf.text import PipelineConfig, fit_transform


@pytest.fixture(scope="module")
def features():
    corpus = make_corpus(200, seed=21)
    _, X = fit_transform(corpus, PipelineConfig())
    return X, corpus.labels()


class TestCartesian:
    def test_two_params(self):
        assert cartesian({"a": [1, 2], "b": ["x"]}) == [{"a": 1, "b": "x"}, {"a": 2, "b": "x"}]

    def test_empty_grid(self):
        assert cartesian({}) == [{}]

    def test_twelve(self):
        out = cartesian({"a": [1, 2], "b": ["x", "y"], "c": ["p", "q", "r"]})
        assert len(out) == 12
        assert out[0] == {"a": 1, "b": "x", "c": "p"} and out[1]["c"] == "q"
        assert len({tuple(d.values()) for d in out}) == 12

    def test_empty_candidate_list(self):
        with pytest.raises(ValueError):
            cartesian({"a": []})


def test_default_grids_reach_reported_winners():
    mlp = DEFAULT_GRIDS["MLP"]
    assert GRID_SEARCH_BEST.activation in mlp["activation"]
    assert GRID_SEARCH_BEST.learning_rate_policy in mlp["learning_rate_policy"]
    assert GRID_SEARCH_BEST.max_iter in mlp["max_iter"]
    assert "modified_huber" in DEFAULT_GRIDS["SGD"]["loss"] and 5000 in DEFAULT_GRIDS["SGD"]["max_iter"]
    assert 2 in DEFAULT_GRIDS["KNN"]["n_neighbors"] and "distance" in DEFAULT_GRIDS["KNN"]["weighting"]


class TestGridSearch:
    def test_single_assignment(self, features):
        X, y = features
        result = grid_search("RIDGE", {"alpha": [1.0]}, X, y, k=3)
        assert len(result.table) == 1
        assert result.best_params == {"alpha": 1.0}
        assert result.best_score == result.table[0].mean_f1

    def test_table_shape_and_best(self, features):
        X, y = features
        result = grid_search("KNN", {"n_neighbors": [1, 3], "weighting": ["uniform", "distance"]}, X, y, k=3)
        assert len(result.table) == 4
        assert result.best_score == max(r.mean_f1 for r in result.table)
        first_best = next(r for r in result.table if r.mean_f1 == result.best_score)
        assert result.best_params == first_best.params
        assert all(len(r.fold_f1) == 3 for r in result.table)
        assert len(result.format().splitlines()) == 5

    def test_failures_recorded(self, features):
        X, y = features
        result = grid_search("RIDGE", {"alpha": [-1.0, 1.0]}, X, y, k=3)
        assert result.table[0].mean_f1 == -math.inf and result.table[0].error
        assert result.best_params == {"alpha": 1.0}
        assert "FAILED" in result.format()

    def test_deterministic(self, features):
        X, y = features
        grid = {"loss": ["logistic", "modified_huber"], "max_iter": [20]}
        a = grid_search("SGD", grid, X, y, k=3, seed=5)
        b = grid_search("SGD", grid, X, y, k=3, seed=5)
        assert [r.fold_f1 for r in a.table] == [r.fold_f1 for r in b.table]

    def test_folds_at_least_two(self, features):
        X, y = features
        with pytest.raises(ValueError):
            grid_search("RIDGE", {"alpha": [1.0]}, X, y, k=1)

    @pytest.mark.slow
    def test_mlp_grid_on_separable_corpus(self):
        corpus = make_corpus(400, signal=0.5, leak=0.05, seed=21)
        _, X = fit_transform(corpus, PipelineConfig())
        y = corpus.labels()
        grid = {"activation": ["tanh"], "max_iter": [50, 100]}
        a = grid_search("MLP", grid, X, y, k=5, seed=0)
        assert all(r.mean_f1 >= 0.95 for r in a.table)
        b = grid_search("MLP", grid, X, y, k=5, seed=0)
        assert [r.fold_f1 for r in a.table] == [r.fold_f1 for r in b.table]

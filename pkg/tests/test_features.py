import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from ticketclf.features import (
    FeatureMask, apply_mask, chi2_scores, format_sweep, select_features, select_top_k,
    sweep_feature_counts,
)
from ticketclf.text import PipelineConfig, fit_transform
from ticketclf.synthetic import make_corpus

from oracles import dense_chi2


class TestChi2:
    def test_independent_feature(self):
        assert chi2_scores(np.ones((4, 1)), [1, 0, 1, 0])[0] == 0.0

    def test_hand_example(self):
        assert chi2_scores(np.array([[1.0], [0.0]]), [1, 0])[0] == pytest.approx(1.0, abs=1e-15)

    def test_toy_matrix_matches_oracle(self):
        X = np.array([[0.2, 0.0, 1.0, 0.5],
                      [0.0, 0.7, 0.3, 0.5],
                      [0.9, 0.1, 0.0, 0.5],
                      [0.0, 0.0, 0.4, 0.0],
                      [0.3, 0.6, 0.0, 0.5]])
        y = np.array([1, 0, 1, 0, 0])
        np.testing.assert_allclose(chi2_scores(sp.csr_matrix(X), y), dense_chi2(X, y), rtol=0, atol=1e-12)

    def test_empty_feature_scores_zero(self):
        assert chi2_scores(np.array([[0.0, 1.0], [0.0, 0.0]]), [1, 0])[0] == 0.0

    def test_negative_values_rejected(self):
        with pytest.raises(ValueError):
            chi2_scores(np.array([[-1.0], [1.0]]), [1, 0])

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            chi2_scores(np.eye(2), [1, 1])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            chi2_scores(np.eye(3), [1, 0])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0))
    def test_nonnegative_and_linear_in_scale(self, seed, c):
        rng = np.random.default_rng(seed)
        X = rng.random((8, 5)) * (rng.random((8, 5)) < 0.6)
        y = np.array([1, 0] * 4)
        base = chi2_scores(X, y)
        assert np.all(base >= 0) and np.all(np.isfinite(base))
        scaled = X.copy()
        scaled[:, 2] *= c
        np.testing.assert_allclose(chi2_scores(scaled, y)[2], c * base[2], rtol=1e-10, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_small_corpora_match_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 11))
        X = rng.random((n, 6)) * (rng.random((n, 6)) < 0.5)
        y = np.zeros(n, dtype=int)
        y[: max(1, n // 2)] = 1
        np.testing.assert_allclose(chi2_scores(X, y), dense_chi2(X, y), rtol=0, atol=1e-12)


class TestSelectTopK:
    def test_argsort(self):
        assert select_top_k([3, 1, 2], 2).selected.tolist() == [0, 2]

    def test_tie_break_lower_index(self):
        assert select_top_k([1, 1], 1).selected.tolist() == [0]

    def test_saturation(self):
        mask = select_top_k(np.arange(10.0), 10**6)
        assert mask.selected.tolist() == list(range(10))

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            select_top_k([1.0], 0)

    @given(st.lists(st.integers(0, 5).map(float), min_size=1, max_size=30), st.integers(1, 40))
    def test_invariants(self, scores, k):
        mask = select_top_k(scores, k)
        assert len(mask) == min(k, len(scores))
        assert np.all(np.diff(mask.selected) > 0)
        assert np.all(mask.scores >= 0)
        left_out = np.setdiff1d(np.arange(len(scores)), mask.selected)
        if len(left_out):
            assert min(scores[i] for i in mask.selected) >= max(scores[i] for i in left_out)
        assert select_top_k(scores, k).selected.tolist() == mask.selected.tolist()


class TestApplyMask:
    def test_identity(self):
        X = sp.random(5, 4, density=0.5, random_state=0, format="csr")
        mask = FeatureMask(np.arange(4), 4, np.zeros(4), 4)
        np.testing.assert_array_equal(apply_mask(X, mask).toarray(), X.toarray())

    def test_empty_column_removal(self):
        X = sp.csr_matrix(np.array([[1.0, 0.0, 2.0], [0.0, 0.0, 3.0]]))
        out = apply_mask(X, FeatureMask(np.array([0, 2]), 2, np.ones(2), 3))
        assert out.toarray().tolist() == [[1.0, 2.0], [0.0, 3.0]]

    def test_matches_dense_slice(self, rng):
        D = rng.random((6, 4))
        out = apply_mask(sp.csr_matrix(D), FeatureMask(np.array([1, 3]), 2, np.ones(2), 4))
        np.testing.assert_array_equal(out.toarray(), D[:, [1, 3]])

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_mask(sp.eye(3, format="csr"), FeatureMask(np.array([0, 5]), 2, np.ones(2), 6))

    def test_select_features_none_keeps_all(self):
        X = sp.eye(4, format="csr")
        mask, out = select_features(X, [1, 0, 1, 0], None)
        assert mask is None and out.shape == (4, 4)


@pytest.fixture(scope="module")
def synthetic_features():
    corpus = make_corpus(80, seed=5)
    _, X = fit_transform(corpus, PipelineConfig(ngram_max=1))
    return X, corpus.labels()


class TestSweep:
    def test_two_k_values(self, synthetic_features):
        X, y = synthetic_features
        rows = sweep_feature_counts(X, y, grid=(2, 4), folds=3,
                                    classifiers=None)
        assert [r["k"] for r in rows] == [2, 4]
        assert all(0.0 <= r["mean_f1"] <= 1.0 for r in rows)
        assert all(len(r["fold_f1"]) == 3 for r in rows)

    def test_single_k_and_table(self, synthetic_features):
        from ticketclf.classifiers import ClassifierSpec
        X, y = synthetic_features
        rows = sweep_feature_counts(X, y, grid=(5,), folds=3, classifiers=[ClassifierSpec("RIDGE")])
        assert len(rows) == 1
        table = format_sweep(rows).splitlines()
        assert table[0].split("\t") == ["k", "classifier", "mean_f1", "ci95"]
        assert len(table) == 2

    def test_clamps_and_is_reproducible(self, synthetic_features, caplog):
        from ticketclf.classifiers import ClassifierSpec
        X, y = synthetic_features
        specs = [ClassifierSpec("RIDGE")]
        grid = (1, 10, 10**6)
        rows = sweep_feature_counts(X, y, grid=grid, folds=3, classifiers=specs)
        assert rows[-1]["k"] == X.shape[1]
        assert "clamping" in caplog.text
        assert rows == sweep_feature_counts(X, y, grid=grid, folds=3, classifiers=specs)
        assert len({round(r["mean_f1"], 9) for r in rows}) > 1

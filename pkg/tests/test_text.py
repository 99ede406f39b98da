import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ticketclf.ingest import Ticket
from ticketclf.sparse import is_canonical, load_triplets, row_pairs, save_triplets
from ticketclf.text import (
    ENGLISH_STOP_WORDS, EmptyVocabularyError, PipelineConfig, TfidfModel, Vocabulary,
    build_document, count_matrix, fit_tfidf, fit_transform, fit_vocabulary, ngrams, tokenize,
    transform_tfidf,
)

from conftest import SAMPLE_TICKET, small_corpus
from oracles import brute_ngram_counts, dense_tfidf

UNIGRAMS = PipelineConfig(ngram_min=1, ngram_max=1, max_df_ratio=1.0, min_df_docs=1, summary_repeats=1)


def last_sentence():
    return SAMPLE_TICKET["description"].split("HttpMethodBase. ", 1)[1]


class TestBuildDocument:
    def test_repeats_summary(self):
        t = Ticket("A-1", "a b", "c")
        assert build_document(t, 3) == "a b a b a b c"

    def test_empty_description(self):
        assert build_document(Ticket("A-1", "x", ""), 1) == "x"

    def test_sample_ticket(self, sample_ticket):
        doc = build_document(sample_ticket, 3)
        assert doc.lower().count("default charset") == 3
        assert doc.index("As defined in RFC2616") > doc.lower().rindex("default charset")


class TestTokenize:
    def test_sample_sentence_tokens(self):
        toks = tokenize(last_sentence())
        for t in ("see", "371", "canonicalization", "text", "defaults", "rfc", "2616"):
            assert t in toks

    def test_short_tokens_dropped(self):
        assert tokenize("A. b? C!") == []

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_deleted_inside_words(self):
        assert tokenize("ISO-8859-1 don't foo_bar") == ["iso88591", "dont", "foobar"]

    def test_stop_words_applied_before_ngrams(self):
        toks = tokenize("the parser and the lexer", ENGLISH_STOP_WORDS)
        assert toks == ["parser", "lexer"]
        assert ngrams(toks, 2, 2) == ["parser lexer"]

    @given(st.text())
    def test_idempotent(self, s):
        toks = tokenize(s)
        assert tokenize(" ".join(toks)) == toks


class TestNgrams:
    def test_bigrams_of_sample(self):
        bi = ngrams(tokenize(last_sentence(), ENGLISH_STOP_WORDS), 2, 2)
        assert bi == ["see 371", "371 canonicalization", "canonicalization text",
                      "text defaults", "defaults rfc", "rfc 2616"]

    def test_trigrams_of_sample(self):
        tri = ngrams(tokenize(last_sentence(), ENGLISH_STOP_WORDS), 3, 3)
        assert tri == ["see 371 canonicalization", "371 canonicalization text",
                       "canonicalization text defaults", "text defaults rfc", "defaults rfc 2616"]

    def test_without_stop_words_keeps_function_words(self):
        bi = ngrams(tokenize(last_sentence()), 2, 2)
        assert "canonicalization and" in bi and "defaults at" in bi

    def test_window_too_large(self):
        assert ngrams(["a"], 2, 3) == []

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            ngrams(["a", "b"], 2, 1)

    @given(st.lists(st.sampled_from(["aa", "bb", "cc"]), max_size=12), st.integers(1, 3))
    def test_count_formula(self, toks, n):
        assert len(ngrams(toks, n, n)) == max(0, len(toks) - n + 1)

    def test_matches_brute_force(self):
        toks = ["aa", "bb", "cc", "aa", "bb"]
        got = ngrams(toks, 1, 3)
        ref = brute_ngram_counts([toks], 1, 3)[0]
        assert sorted(set(got)) == sorted(ref)
        assert all(got.count(g) == c for g, c in ref.items())


class TestVocabulary:
    def test_max_df_excludes_common_term(self):
        corpus = ["xx yy", "xx zz", "xx ww", "xx vv"]
        cfg = PipelineConfig(ngram_min=1, ngram_max=1, max_df_ratio=0.5, min_df_docs=1)
        vocab = fit_vocabulary(corpus, cfg)
        assert vocab.terms == ("vv", "ww", "yy", "zz")
        assert vocab.doc_freq.tolist() == [1, 1, 1, 1]

    def test_min_df(self):
        cfg = PipelineConfig(ngram_min=1, ngram_max=1, max_df_ratio=1.0, min_df_docs=2)
        vocab = fit_vocabulary(["aa bb", "aa cc", "dd ee"], cfg)
        assert vocab.terms == ("aa",)
        assert vocab.doc_freq.tolist() == [2]

    def test_max_df_boundary_is_floor(self):
        # 5 docs, ratio 0.5 -> a term may appear in at most floor(2.5) = 2 docs
        docs = ["aa bb", "aa bb", "aa cc", "dd", "ee"]
        cfg = PipelineConfig(ngram_min=1, ngram_max=1, max_df_ratio=0.5, min_df_docs=1)
        vocab = fit_vocabulary(docs, cfg)
        assert "aa" not in vocab.index and "bb" in vocab.index

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            fit_vocabulary([], PipelineConfig())

    def test_empty_vocabulary(self):
        with pytest.raises(EmptyVocabularyError):
            fit_vocabulary(["aa", "bb"], PipelineConfig(min_df_docs=2))

    def test_dense_indices_lexicographic(self):
        vocab = fit_vocabulary(["zz yy", "yy xx", "xx zz"], PipelineConfig(ngram_max=2, max_df_ratio=1.0,
                                                                             min_df_docs=1))
        assert list(vocab.terms) == sorted(vocab.terms)
        assert sorted(vocab.index.values()) == list(range(len(vocab)))

    @settings(max_examples=30, deadline=None)
    @given(st.permutations(["aa bb cc", "bb cc dd", "cc dd ee", "aa ee", "bb dd ff aa"]))
    def test_permutation_invariant(self, docs):
        cfg = PipelineConfig(ngram_max=2, min_df_docs=1)
        ref = fit_vocabulary(["aa bb cc", "bb cc dd", "cc dd ee", "aa ee", "bb dd ff aa"], cfg)
        assert fit_vocabulary(list(docs), cfg) == ref

    def test_sample_ticket_corpus(self, sample_ticket):
        vocab = fit_vocabulary([sample_ticket], PipelineConfig(max_df_ratio=1.0, min_df_docs=1))
        assert "default charset" in vocab.index
        assert "rfc 2616" in vocab.index


class TestCounts:
    def test_counts(self):
        cfg = PipelineConfig(ngram_min=1, ngram_max=1, max_df_ratio=1.0, min_df_docs=1)
        vocab = Vocabulary(("aa", "bb"), np.array([1, 1]), 1)
        X = count_matrix(["aa aa bb"], vocab, cfg)
        assert row_pairs(X, 0) == [(0, 2.0), (1, 1.0)]

    def test_out_of_vocabulary_row(self):
        cfg = PipelineConfig(ngram_min=1, ngram_max=1)
        vocab = Vocabulary(("aa",), np.array([1]), 1)
        X = count_matrix(["zz qq"], vocab, cfg)
        assert X.shape == (1, 1) and X.nnz == 0

    def test_counts_match_brute_force(self):
        docs = ["aa bb aa bb cc", "bb cc dd bb cc", "aa dd aa ee aa"]
        cfg = PipelineConfig(ngram_min=1, ngram_max=3, max_df_ratio=1.0, min_df_docs=1)
        vocab = fit_vocabulary(docs, cfg)
        X = count_matrix(docs, vocab, cfg).toarray()
        ref = brute_ngram_counts([d.split() for d in docs], 1, 3)
        for d, counts in enumerate(ref):
            for g, c in counts.items():
                assert X[d, vocab.index[g]] == c
            assert X[d].sum() == sum(counts.values())


class TestTfidf:
    def test_idf_of_ubiquitous_term(self):
        vocab = Vocabulary(("aa",), np.array([4]), 4)
        model = fit_tfidf(np.zeros((4, 1)), vocab)
        assert model.idf[0] == 1.0

    def test_idf_smooth_value(self):
        vocab = Vocabulary(("aa",), np.array([1]), 3)
        model = fit_tfidf(np.zeros((3, 1)), vocab)
        assert model.idf[0] == pytest.approx(math.log(4 / 2) + 1, abs=1e-15)
        assert model.idf[0] == pytest.approx(1.6931471805599454)

    def test_idf_single_document(self):
        vocab = Vocabulary(("aa",), np.array([1]), 1)
        assert fit_tfidf(np.zeros((1, 1)), vocab).idf[0] == 1.0

    def test_two_equal_terms_normalize(self):
        vocab = Vocabulary(("aa", "bb"), np.array([1, 1]), 1)
        cfg = PipelineConfig(ngram_min=1, ngram_max=1, sublinear_tf=True)
        model = TfidfModel(vocab, np.array([1.0, 1.0]), cfg)
        X = transform_tfidf(model, count_matrix(["aa bb"], vocab, cfg)).toarray()
        np.testing.assert_allclose(X, [[1 / math.sqrt(2), 1 / math.sqrt(2)]], atol=1e-15)

    def test_negative_counts_rejected(self):
        vocab = Vocabulary(("aa",), np.array([1]), 1)
        model = fit_tfidf(np.zeros((1, 1)), vocab)
        with pytest.raises(ValueError):
            transform_tfidf(model, np.array([[-1.0]]))

    def test_zero_count_absent(self):
        vocab = Vocabulary(("aa", "bb"), np.array([1, 1]), 2)
        model = fit_tfidf(np.zeros((2, 2)), vocab)
        X = transform_tfidf(model, np.array([[3.0, 0.0], [0.0, 0.0]]))
        assert X.nnz == 1 and is_canonical(X)
        assert X[1].nnz == 0

    @pytest.mark.parametrize("sublinear", [True, False])
    def test_matches_dense_oracle(self, sublinear):
        docs = ["aa bb aa bb cc", "bb cc dd bb cc", "aa dd aa ee aa"]
        cfg = PipelineConfig(ngram_min=1, ngram_max=2, max_df_ratio=1.0, min_df_docs=1,
                             sublinear_tf=sublinear)
        _, X = fit_transform(docs, cfg)
        vocab = fit_vocabulary(docs, cfg)
        ref = dense_tfidf(brute_ngram_counts([d.split() for d in docs], 1, 2), vocab.terms, sublinear)
        np.testing.assert_allclose(X.toarray(), ref, rtol=0, atol=1e-12)

    def test_row_norms_and_bounds(self):
        corpus = small_corpus(["crash in parser", "add parser option", "parser crash again",
                               "option docs", "crash docs"])
        model, X = fit_transform(corpus, PipelineConfig(max_df_ratio=1.0, min_df_docs=1))
        assert np.all(model.idf >= 1.0)
        assert np.all(X.data >= 0)
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        np.testing.assert_allclose(norms[norms > 0], 1.0, atol=1e-9)

    def test_model_round_trip(self, tmp_path):
        corpus = small_corpus(["crash in parser", "add parser option", "parser crash again", "crash docs"])
        model, X = fit_transform(corpus, PipelineConfig(min_df_docs=1, stop_words=("in",)))
        path = tmp_path / "tfidf.json"
        model.save(path)
        loaded = TfidfModel.load(path)
        assert loaded.vocabulary == model.vocabulary
        assert loaded.config == model.config
        np.testing.assert_array_equal(loaded.transform(corpus).toarray(), X.toarray())

    def test_model_version_checked(self, tmp_path):
        corpus = small_corpus(["crash in parser", "add parser option", "parser crash", "crash docs"])
        model, _ = fit_transform(corpus, PipelineConfig(min_df_docs=1))
        d = model.to_dict()
        d["version"] = 99
        with pytest.raises(ValueError, match="version"):
            TfidfModel.from_dict(d)


class TestPipelineConfig:
    @pytest.mark.parametrize("kwargs", [
        {"ngram_min": 2, "ngram_max": 1}, {"ngram_max": 4}, {"max_df_ratio": 0.0},
        {"min_df_docs": 0}, {"summary_repeats": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            PipelineConfig(**kwargs)


def test_triplets_round_trip(tmp_path):
    corpus = small_corpus(["crash in parser", "add parser option", "parser crash again", "crash docs"])
    _, X = fit_transform(corpus, PipelineConfig(min_df_docs=1))
    path = tmp_path / "m.tsv"
    save_triplets(X, path)
    Y = load_triplets(path)
    assert Y.shape == X.shape
    np.testing.assert_array_equal(Y.toarray(), X.toarray())
    body = path.read_text().splitlines()[1:]
    keys = [tuple(map(int, line.split("\t")[:2])) for line in body]
    assert keys == sorted(keys)

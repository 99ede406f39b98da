"""Ticket text to TF-IDF vectors over word n-grams.

The pipeline is: build one document per ticket (summary repeated, then the
description), tokenize, form contiguous n-grams, keep n-grams whose document
frequency lies within ``[min_df_docs, floor(max_df_ratio * n_docs)]``, count,
then weight by ``tf * idf`` with the smooth idf
``ln((1 + n_docs) / (1 + df)) + 1`` and L2-normalize every row.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .ingest import Ticket
from .sparse import canonical

TFIDF_FORMAT = "ticketclf.tfidf"
TFIDF_VERSION = 1

_NON_ALNUM = re.compile(r"[^\w\s]|_", flags=re.UNICODE)

# Function words only; content words such as "see" or "text" are kept.
ENGLISH_STOP_WORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because been
    before being below between both but by can could did do does doing down during
    each few for from further had has have having he her here hers herself him
    himself his how if in into is it its itself just me more most my myself no nor
    not of off on once only or other our ours ourselves out over own same she
    should so some such than that the their theirs them themselves then there these
    they this those through to too under until up very was we were what when where
    which while who whom why will with would you your yours yourself yourselves
    """.split()
)


class EmptyVocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    ngram_min: int = 1
    ngram_max: int = 3
    max_df_ratio: float = 0.5
    min_df_docs: int = 2
    summary_repeats: int = 3
    sublinear_tf: bool = True
    stop_words: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 1 <= self.ngram_min <= self.ngram_max <= 3:
            raise ValueError("need 1 <= ngram_min <= ngram_max <= 3")
        if not 0 < self.max_df_ratio <= 1:
            raise ValueError("max_df_ratio must be in (0, 1]")
        if self.min_df_docs < 1:
            raise ValueError("min_df_docs must be >= 1")
        if self.summary_repeats < 1:
            raise ValueError("summary_repeats must be >= 1")
        if self.stop_words is not None:
            object.__setattr__(self, "stop_words", tuple(sorted(set(self.stop_words))))

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        if d.get("stop_words") is not None:
            d["stop_words"] = tuple(d["stop_words"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["stop_words"] is not None:
            d["stop_words"] = list(d["stop_words"])
        return d


def build_document(ticket: Ticket, summary_repeats: int = 3) -> str:
    parts = [ticket.summary] * summary_repeats
    if ticket.description:
        parts.append(ticket.description)
    return " ".join(parts)


def tokenize(text: str, stop_words: Iterable[str] | None = None) -> list[str]:
    """Lowercase, delete punctuation, split on whitespace, drop 1-char tokens.

    Punctuation is deleted rather than replaced, so ``"3.7.1"`` becomes ``"371"``.

    >>> tokenize('See "3.7.1 Canonicalization" at RFC 2616')
    ['see', '371', 'canonicalization', 'at', 'rfc', '2616']
    """
    tokens = [tok for tok in _NON_ALNUM.sub("", text.lower()).split() if len(tok) >= 2]
    if stop_words:
        stop = stop_words if isinstance(stop_words, (set, frozenset)) else set(stop_words)
        tokens = [tok for tok in tokens if tok not in stop]
    return tokens


def ngrams(tokens: Sequence[str], n_min: int, n_max: int) -> list[str]:
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    out = []
    for n in range(n_min, n_max + 1):
        out.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return out


def _as_documents(docs, config: PipelineConfig) -> list[str]:
    return [d if isinstance(d, str) else build_document(d, config.summary_repeats) for d in docs]


def analyze(doc: str, config: PipelineConfig) -> list[str]:
    return ngrams(tokenize(doc, config.stop_words), config.ngram_min, config.ngram_max)


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    doc_freq: np.ndarray
    n_docs: int
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.terms == other.terms
            and self.n_docs == other.n_docs
            and np.array_equal(self.doc_freq, other.doc_freq)
        )


def fit_vocabulary(corpus, config: PipelineConfig) -> Vocabulary:
    """Document-frequency filtered n-gram vocabulary, indexed in lexicographic order.

    ``corpus`` may hold tickets or already-built document strings.
    """
    docs = _as_documents(corpus, config)
    if not docs:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df = Counter()
    for doc in docs:
        df.update(set(analyze(doc, config)))
    max_df = math.floor(config.max_df_ratio * len(docs))
    kept = sorted(t for t, c in df.items() if config.min_df_docs <= c <= max_df)
    if not kept:
        raise EmptyVocabularyError(
            f"no n-gram survives df filtering (min_df={config.min_df_docs}, max_df={max_df})"
        )
    return Vocabulary(
        terms=tuple(kept),
        doc_freq=np.array([df[t] for t in kept], dtype=np.int64),
        n_docs=len(docs),
    )


def count_matrix(corpus, vocab: Vocabulary, config: PipelineConfig) -> sp.csr_matrix:
    """Raw n-gram occurrence counts, documents x vocabulary terms."""
    docs = _as_documents(corpus, config)
    indptr, indices, data = [0], [], []
    index = vocab.index
    for doc in docs:
        counts = Counter(index[g] for g in analyze(doc, config) if g in index)
        cols = sorted(counts)
        indices.extend(cols)
        data.extend(counts[c] for c in cols)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr)),
        shape=(len(docs), len(vocab)),
    )


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: Vocabulary
    idf: np.ndarray
    config: PipelineConfig

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def transform(self, corpus) -> sp.csr_matrix:
        """Vectorize unseen tickets (or document strings) with the fitted model."""
        return transform_tfidf(self, count_matrix(corpus, self.vocabulary, self.config))

    def to_dict(self) -> dict:
        return {
            "format": TFIDF_FORMAT,
            "version": TFIDF_VERSION,
            "config": self.config.to_dict(),
            "n_docs": self.vocabulary.n_docs,
            "terms": list(self.vocabulary.terms),
            "doc_freq": self.vocabulary.doc_freq.tolist(),
            "idf": self.idf.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        if d.get("format") != TFIDF_FORMAT:
            raise ValueError(f"not a TF-IDF model (format={d.get('format')!r})")
        if d.get("version") != TFIDF_VERSION:
            raise ValueError(
                f"unsupported TF-IDF model version {d.get('version')!r}, expected {TFIDF_VERSION}"
            )
        vocab = Vocabulary(
            terms=tuple(d["terms"]),
            doc_freq=np.asarray(d["doc_freq"], dtype=np.int64),
            n_docs=int(d["n_docs"]),
        )
        idf = np.asarray(d["idf"], dtype=np.float64)
        if not len(vocab) == len(idf) == len(vocab.doc_freq):
            raise ValueError("TF-IDF model arrays have inconsistent lengths")
        return cls(vocab, idf, PipelineConfig.from_dict(d["config"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TfidfModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def smooth_idf(doc_freq, n_docs: int) -> np.ndarray:
    return np.log((1.0 + n_docs) / (1.0 + np.asarray(doc_freq, dtype=np.float64))) + 1.0


def fit_tfidf(counts, vocab: Vocabulary, config: PipelineConfig | None = None) -> TfidfModel:
    if counts.shape[1] != len(vocab):
        raise ValueError(f"count matrix has {counts.shape[1]} columns, vocabulary {len(vocab)}")
    return TfidfModel(vocab, smooth_idf(vocab.doc_freq, vocab.n_docs), config or PipelineConfig())


def transform_tfidf(model: TfidfModel, counts) -> sp.csr_matrix:
    X = sp.csr_matrix(counts, dtype=np.float64, copy=True)
    if X.shape[1] != model.n_features:
        raise ValueError(f"count matrix has {X.shape[1]} columns, model {model.n_features}")
    if X.nnz and X.data.min() < 0:
        raise ValueError("term counts must be nonnegative")
    X.eliminate_zeros()
    if model.config.sublinear_tf:
        np.log(X.data, out=X.data)
        X.data += 1.0
    X.data *= model.idf[X.indices]
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    row_of = np.repeat(np.arange(X.shape[0]), np.diff(X.indptr))
    X.data /= norms[row_of]
    return canonical(X)


def fit_transform(corpus, config: PipelineConfig) -> tuple[TfidfModel, sp.csr_matrix]:
    docs = _as_documents(corpus, config)
    vocab = fit_vocabulary(docs, config)
    counts = count_matrix(docs, vocab, config)
    model = fit_tfidf(counts, vocab, config)
    return model, transform_tfidf(model, counts)

"""Turn one ticket into n-grams, then a small corpus into a TF-IDF matrix.

Run with ``python demos/01_vectorize_ticket.py``.
"""
import numpy as np

from ticketclf.features import chi2_scores, select_top_k
from ticketclf.ingest import Ticket
from ticketclf.synthetic import make_corpus
from ticketclf.text import (
    ENGLISH_STOP_WORDS, PipelineConfig, build_document, fit_transform, ngrams, tokenize,
)

ticket = Ticket(
    key="HTTPCLIENT-126",
    summary="Default charset",
    description="As defined in RFC2616 the default character set is ISO-8859-1 an not US-ASCII "
                "as defined in HttpMethodBase. See \"3.7.1 Canonicalization and Text Defaults\" at RFC 2616",
)

# The summary is repeated so it weighs more than the description.
doc = build_document(ticket, 3)
print(doc[:80], "...")

tokens = tokenize(doc)
print(len(tokens), "tokens, first ten:", tokens[:10])

# With the English stop list the function words disappear before n-grams are built.
tail = tokenize("See 3.7.1 Canonicalization and Text Defaults at RFC 2616", ENGLISH_STOP_WORDS)
for n in (1, 2, 3):
    print(f"{n}-grams:", ngrams(tail, n, n))

# A generated corpus, vectorized with uni-, bi- and tri-grams.
corpus = make_corpus(200, seed=0)
tfidf, X = fit_transform(corpus, PipelineConfig(ngram_min=1, ngram_max=3))
print(f"\n{X.shape[0]} tickets x {X.shape[1]} n-grams, {X.nnz} non-zeros")
print("row norms:", np.round(np.sqrt(X.multiply(X).sum(axis=1)).A.ravel()[:5], 6))

# Rank n-grams by chi-square against the BUG label.
y = corpus.labels()
mask = select_top_k(chi2_scores(X, y), 10)
terms = tfidf.vocabulary.terms
print("top n-grams:", [terms[i] for i in mask.selected])

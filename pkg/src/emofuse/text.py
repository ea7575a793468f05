"""TF-IDF with corpus-frequency vocabulary pruning, and pooled word vectors.

    TF-IDF(t, d) = TF(t, d) * IDF(t)
    IDF(t)       = ln((1 + n_docs) / (1 + df(t))) + 1

TF is the raw count of ``t`` in ``d``; ``df(t)`` is the number of documents
containing ``t``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCorpus, NoKnownTokens

_TOKEN = re.compile(r"[^\W_]+")


def normalize_tokens(text: str, lemma_map=None) -> list[str]:
    """Lowercase, split on runs of non-alphanumerics, map each token to its prototype."""
    lemma_map = lemma_map or {}
    return [lemma_map.get(t, t) for t in _TOKEN.findall(text.lower())]


@dataclass
class TfIdfModel:
    vocab: dict  # token -> column, tokens in lexicographic order
    df: dict  # token -> number of documents containing it
    n_docs: int
    min_freq: int = 3

    def idf(self, token: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df[token])) + 1.0

    @property
    def tokens(self) -> list[str]:
        return list(self.vocab)

    def idf_vector(self) -> np.ndarray:
        return np.array([self.idf(t) for t in self.vocab])


def build_vocab(docs, min_freq: int = 3) -> TfIdfModel:
    """Keep tokens whose total corpus count is at least ``min_freq``."""
    docs = list(docs)
    if not docs:
        raise EmptyCorpus("cannot build a vocabulary from zero documents")
    counts = Counter()
    df = Counter()
    for doc in docs:
        counts.update(doc)
        df.update(set(doc))
    kept = sorted(t for t, c in counts.items() if c >= min_freq)
    return TfIdfModel({t: i for i, t in enumerate(kept)}, {t: df[t] for t in kept}, len(docs), min_freq)


def tfidf_transform(model: TfIdfModel, doc, l2: bool = False) -> dict:
    """Sparse weights ``{column: weight}`` for one tokenized document.

    Out-of-vocabulary tokens are ignored.
    """
    tf = Counter(t for t in doc if t in model.vocab)
    weights = {model.vocab[t]: c * model.idf(t) for t, c in tf.items()}
    if l2 and weights:
        norm = math.sqrt(sum(w * w for w in weights.values()))
        weights = {i: w / norm for i, w in weights.items()}
    return dict(sorted(weights.items()))


def tfidf_matrix(model: TfIdfModel, docs, l2: bool = False) -> np.ndarray:
    out = np.zeros((len(docs), len(model.vocab)))
    for r, doc in enumerate(docs):
        for c, w in tfidf_transform(model, doc, l2).items():
            out[r, c] = w
    return out


def embed_pool(tokens, table: dict, functional: str = "mean") -> np.ndarray:
    """Mean or max over the vectors of tokens found in ``table``; others are skipped."""
    vecs = [table[t] for t in tokens if t in table]
    if not vecs:
        raise NoKnownTokens("none of the tokens has an embedding")
    m = np.asarray(vecs, dtype=np.float64)
    if functional == "mean":
        return m.mean(axis=0)
    if functional == "max":
        return m.max(axis=0)
    raise ValueError(f"unknown functional {functional!r}")

"""
TF-IDF and embedding features from transcripts
==============================================

Fit a vocabulary on a tiny corpus, weight terms, and average word vectors.
"""

from pathlib import Path

from emofuse import io
from emofuse.text import build_vocab, embed_pool, normalize_tokens, tfidf_transform

fixtures = Path(__file__).resolve().parents[1] / "tests" / "fixtures"
lemma = io.read_lemma_map(fixtures / "lemma_map.csv")
docs = [normalize_tokens(line, lemma) for line in io.read_corpus(fixtures / "corpus4.txt")]
print(docs[0])

# tokens seen fewer than three times in the corpus are dropped
model = build_vocab(docs, min_freq=3)
print("vocab", model.tokens)
print("idf  ", model.idf_vector().round(4))

# sparse weights keyed by vocabulary column
for doc in docs:
    print(tfidf_transform(model, doc, l2=True))

# mean of the known word vectors; unknown tokens are skipped
table = io.read_embeddings(fixtures / "toy_embeddings.txt")
print(embed_pool(normalize_tokens("Oh my god, what a surprise"), table))

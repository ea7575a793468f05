import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from emofuse.errors import EmptyCorpus, NoKnownTokens
from emofuse.io import read_corpus, read_embeddings, read_lemma_map
from emofuse.text import build_vocab, embed_pool, normalize_tokens, tfidf_matrix, tfidf_transform


def brute_tfidf(docs, min_freq):
    total = {}
    for d in docs:
        for t in d:
            total[t] = total.get(t, 0) + 1
    vocab = sorted(t for t, c in total.items() if c >= min_freq)
    rows = []
    for d in docs:
        row = []
        for t in vocab:
            tf = d.count(t)
            df = sum(t in e for e in docs)
            row.append(tf * (math.log((1 + len(docs)) / (1 + df)) + 1))
        rows.append(row)
    return vocab, np.array(rows)


@pytest.fixture
def corpus(fixtures):
    lemma = read_lemma_map(fixtures / "lemma_map.csv")
    return [normalize_tokens(line, lemma) for line in read_corpus(fixtures / "corpus4.txt")]


class TestTokens:
    def test_prototypes(self):
        assert normalize_tokens("Going, GONE go!", {"going": "go", "gone": "go"}) == ["go", "go", "go"]

    def test_empty(self):
        assert normalize_tokens("", {}) == []

    def test_plain(self):
        assert normalize_tokens("Oh my GOD", {}) == ["oh", "my", "god"]


class TestVocab:
    def test_rare_excluded(self):
        m = build_vocab([["a", "b", "a"], ["a", "b", "c"]], min_freq=3)
        assert list(m.vocab) == ["a"]

    def test_min_freq_one(self):
        m = build_vocab([["b", "a"], ["c"]], min_freq=1)
        assert list(m.vocab) == ["a", "b", "c"]

    def test_fixture_corpus(self, corpus):
        m = build_vocab(corpus, 3)
        assert m.tokens == ["god", "my", "oh", "sorry"]
        assert m.df == {"god": 2, "my": 3, "oh": 3, "sorry": 2}
        assert m.n_docs == 4
        for planted in ("quokka", "zebra", "go", "get"):
            assert planted not in m.vocab

    def test_empty(self):
        with pytest.raises(EmptyCorpus):
            build_vocab([])


class TestTransform:
    def test_everywhere_token(self):
        docs = [["x", "y"], ["x"], ["x", "x"]]
        m = build_vocab(docs, 1)
        assert m.idf("x") == 1.0
        assert tfidf_transform(m, ["x", "x", "x"]) == {m.vocab["x"]: 3.0}

    def test_absent(self):
        m = build_vocab([["a"], ["b"]], 1)
        assert m.vocab["b"] not in tfidf_transform(m, ["a"])

    def test_df1_tf2(self):
        docs = [["rare", "rare", "w"], ["w"], ["w"], ["w"]]
        m = build_vocab(docs, 1)
        got = tfidf_transform(m, docs[0])[m.vocab["rare"]]
        assert got == pytest.approx(2 * (math.log(5 / 2) + 1), abs=1e-12)

    def test_matches_brute_force(self, corpus):
        vocab, expected = brute_tfidf(corpus, 3)
        m = build_vocab(corpus, 3)
        assert m.tokens == vocab
        np.testing.assert_allclose(tfidf_matrix(m, corpus), expected, rtol=0, atol=1e-12)

    def test_l2(self, corpus):
        m = build_vocab(corpus, 3)
        w = tfidf_transform(m, corpus[0], l2=True)
        assert math.fsum(v * v for v in w.values()) == pytest.approx(1.0)

    @given(st.lists(st.lists(st.sampled_from("abcdef"), max_size=8), min_size=1, max_size=6),
           st.integers(1, 4), st.integers(1, 5))
    def test_properties(self, docs, min_freq, m):
        model = build_vocab(docs, min_freq)
        for t in model.vocab:
            assert model.idf(t) >= 1.0
        for t in "abcdef":
            doc1 = [t] * m
            doc2 = [t] * (2 * m)
            w1, w2 = tfidf_transform(model, doc1), tfidf_transform(model, doc2)
            if t in model.vocab:
                assert w2[model.vocab[t]] == 2 * w1[model.vocab[t]]
            else:
                assert w1 == {} and w2 == {}


class TestEmbedPool:
    def test_single(self):
        table = {"a": np.array([1.0, 2.0])}
        np.testing.assert_array_equal(embed_pool(["a", "zz"], table, "max"), [1.0, 2.0])

    def test_two(self):
        table = {"a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])}
        np.testing.assert_array_equal(embed_pool(["a", "b"], table, "max"), [1.0, 1.0])
        np.testing.assert_array_equal(embed_pool(["a", "b"], table, "mean"), [0.5, 0.5])

    def test_fixture_transcript(self, fixtures):
        table = read_embeddings(fixtures / "toy_embeddings.txt")
        toks = normalize_tokens((fixtures / "transcript.txt").read_text())
        # known: oh, my, god, surprise
        np.testing.assert_allclose(embed_pool(toks, table, "mean"), [1.25, -0.0625, 0.5625], atol=1e-15)
        np.testing.assert_array_equal(embed_pool(toks, table, "max"), [3.0, 1.0, 2.0])

    def test_no_known(self):
        with pytest.raises(NoKnownTokens):
            embed_pool(["x"], {"a": np.zeros(2)})

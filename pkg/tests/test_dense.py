import math

import numpy as np
import pytest

from lexsem.corpus import load_corpus
from lexsem.dense import (
    DenseIndex,
    EmbeddingProvider,
    cosine,
    load_query_vectors,
    load_vectors,
    normalize,
    save_vectors,
)
from lexsem.errors import ProviderError, ValidationError

from conftest import STUB_DIM as DIM
from conftest import stub_embedding
from oracles import cosine_direct


class TestCosine:
    def test_identity(self):
        assert cosine([1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_orthogonal(self):
        assert cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_analytic(self):
        assert cosine([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(ValidationError):
            cosine([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_zero_vector(self):
        with pytest.raises(ValidationError):
            cosine([0.0, 0.0], [1.0, 0.0])

    def test_properties_random(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            u = rng.normal(size=6)
            v = rng.normal(size=6)
            c = cosine(u, v)
            assert -1.0 <= c <= 1.0
            assert c == pytest.approx(cosine(v, u), abs=1e-12)
            assert cosine(u, u) == pytest.approx(1.0, abs=1e-12)
            # invariant under positive scaling
            assert c == pytest.approx(cosine(3.5 * u, 0.2 * v), abs=1e-9)
            assert c == pytest.approx(cosine_direct(u, v), abs=1e-9)

    def test_normalize_then_dot_matches_cosine(self):
        rng = np.random.default_rng(29)
        for _ in range(100):
            u = rng.normal(size=12)
            v = rng.normal(size=12)
            direct = cosine(u, v)
            dotted = float(np.dot(normalize(u), normalize(v)))
            assert dotted == pytest.approx(direct, abs=1e-6)


class TestLoadVectors:
    def _vector_file(self, tmp_path, corpus, dim=4, skip=None, extra=None, dup=False):
        rng = np.random.default_rng(31)
        entries = []
        for article in corpus.articles:
            if skip is not None and article.ref == skip:
                continue
            entries.append((article.ref.key, rng.normal(size=dim)))
        if dup:
            entries.append(entries[0])
        if extra is not None:
            entries.append(extra)
        path = tmp_path / "vectors.jsonl"
        save_vectors(path, entries)
        return path

    def test_loads_and_normalizes(self, tmp_path, corpus_file):
        corpus = load_corpus(corpus_file)
        path = tmp_path / "v.jsonl"
        save_vectors(
            path,
            [(a.ref.key, np.array([3.0, 4.0])) for a in corpus.articles],
        )
        index = load_vectors(path, corpus)
        assert index.dim == 2
        np.testing.assert_allclose(index.matrix[0], [0.6, 0.8], atol=1e-12)
        norms = np.linalg.norm(index.matrix, axis=1)
        np.testing.assert_allclose(norms, 1.0, atol=1e-6)

    def test_missing_article_names_ref(self, tmp_path, corpus_file):
        corpus = load_corpus(corpus_file)
        missing = corpus.articles[1].ref
        path = self._vector_file(tmp_path, corpus, skip=missing)
        with pytest.raises(ValidationError, match=str(missing)):
            load_vectors(path, corpus)

    def test_duplicate_rejected(self, tmp_path, corpus_file):
        corpus = load_corpus(corpus_file)
        path = self._vector_file(tmp_path, corpus, dup=True)
        with pytest.raises(ValidationError, match="duplicate"):
            load_vectors(path, corpus)

    def test_unknown_id_rejected(self, tmp_path, corpus_file):
        corpus = load_corpus(corpus_file)
        path = self._vector_file(tmp_path, corpus, extra=("GHOST#1", np.ones(4)))
        with pytest.raises(ValidationError, match="unknown"):
            load_vectors(path, corpus)

    def test_dim_mismatch_rejected(self, tmp_path, corpus_file):
        corpus = load_corpus(corpus_file)
        entries = [(a.ref.key, np.ones(4)) for a in corpus.articles]
        entries[-1] = (entries[-1][0], np.ones(5))
        path = tmp_path / "v.jsonl"
        save_vectors(path, entries)
        with pytest.raises(ValidationError, match="dim"):
            load_vectors(path, corpus)

    def test_query_vectors(self, tmp_path):
        path = tmp_path / "qv.jsonl"
        save_vectors(path, [("q0", np.array([1.0, 0.0])), ("q1", np.array([0.0, 2.0]))])
        table = load_query_vectors(path, 2)
        np.testing.assert_allclose(table, [[1.0, 0.0], [0.0, 1.0]])

    def test_query_vectors_missing(self, tmp_path):
        path = tmp_path / "qv.jsonl"
        save_vectors(path, [("q0", np.array([1.0, 0.0]))])
        with pytest.raises(ValidationError, match="missing"):
            load_query_vectors(path, 2)


class TestDenseTopK:
    def test_exact_match_ranks_first(self):
        matrix = np.eye(4)
        index = DenseIndex(matrix, source="test")
        hits = index.top_k(matrix[2], 4)
        assert hits[0] == (2, 1.0)
        assert all(score == 0.0 for _, score in hits[1:])

    def test_k_covers_corpus(self):
        index = DenseIndex(np.eye(3), source="test")
        assert len(index.top_k(np.array([1.0, 0.0, 0.0]), 50)) == 3

    def test_matches_brute_force(self):
        rng = np.random.default_rng(37)
        matrix = np.vstack([normalize(rng.normal(size=16)) for _ in range(50)])
        index = DenseIndex(matrix, source="test")
        for _ in range(10):
            q = normalize(rng.normal(size=16))
            scores = [cosine_direct(row, q) for row in matrix]
            oracle = sorted(range(50), key=lambda i: (-scores[i], i))
            engine = [p for p, _ in index.top_k(q, 50)]
            assert engine == oracle


class TestProvider:
    def test_info_and_dim(self, stub_provider_url):
        provider = EmbeddingProvider(stub_provider_url)
        assert provider.dim == DIM
        assert provider.info()["model"] == "stub"

    def test_embed_deterministic(self, stub_provider_url):
        provider = EmbeddingProvider(stub_provider_url)
        a = provider.embed("cùng một câu hỏi")
        b = provider.embed("cùng một câu hỏi")
        np.testing.assert_array_equal(a, b)
        assert a.shape == (DIM,)
        assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-9)

    def test_cache_distinct_texts(self, stub_provider_url):
        provider = EmbeddingProvider(stub_provider_url)
        a = provider.embed("một")
        b = provider.embed("hai")
        assert not np.array_equal(a, b)

    def test_embed_many_order_preserved(self, stub_provider_url):
        provider = EmbeddingProvider(stub_provider_url, batch_size=2)
        texts = [f"text {i}" for i in range(7)]
        table = provider.embed_many(texts, max_workers=3)
        assert table.shape == (7, DIM)
        for i, text in enumerate(texts):
            np.testing.assert_allclose(table[i], stub_embedding(text), atol=1e-12)

    def test_offline_provider_is_transport_error(self):
        provider = EmbeddingProvider("http://127.0.0.1:9", timeout=0.5)
        with pytest.raises(ProviderError):
            provider.embed("anything")

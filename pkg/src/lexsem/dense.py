"""Embedding store with exact cosine scoring, plus the embedding-provider client.

Vector file: JSON lines ``{"id": "<law_id>#<article_id>", "vector": [...]}``;
query-vector files use ids ``q<query_id>``.  Vectors are unit-normalized at
load time so scoring reduces to a dot product.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np
import requests

from .corpus import ArticleRef, Corpus
from .errors import ParseError, ProviderError, ValidationError


def normalize(vector: Sequence[float] | np.ndarray) -> np.ndarray:
    """Validate and L2-normalize one vector."""
    arr = np.asarray(vector, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector contains NaN or infinite values")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValidationError("cannot normalize a zero vector")
    return arr / norm


def cosine(u: Sequence[float] | np.ndarray, v: Sequence[float] | np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1] against rounding overshoot."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("cosine is undefined for zero vectors")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


class DenseIndex:
    """One unit vector per article position; immutable after construction."""

    def __init__(self, matrix: np.ndarray, source: str):
        if matrix.ndim != 2:
            raise ValidationError(f"expected a 2-D vector table, got shape {matrix.shape}")
        self.matrix = matrix
        self.source = source

    @property
    def n_articles(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def scores(self, query_vector: np.ndarray) -> np.ndarray:
        """Cosine of a unit query vector against every article."""
        q = np.asarray(query_vector, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValidationError(f"query vector has dim {q.shape}, index has dim {self.dim}")
        return np.clip(self.matrix @ q, -1.0, 1.0)

    def top_k(self, query_vector: np.ndarray, k: int) -> list[tuple[int, float]]:
        """Top-k (position, cos_sim), descending, ties by ascending position."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        scores = self.scores(query_vector)
        order = np.argsort(-scores, kind="stable")[: min(k, self.n_articles)]
        return [(int(pos), float(scores[pos])) for pos in order]


def _read_vector_lines(path: Path):
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict) or "id" not in record or "vector" not in record:
                raise ParseError(f"{path}:{lineno}: expected object with 'id' and 'vector'")
            yield lineno, str(record["id"]), record["vector"]


def load_vectors(path: str | Path, corpus: Corpus) -> DenseIndex:
    """Load article vectors; every corpus article must be covered exactly once."""
    path = Path(path)
    if not corpus.articles:
        raise ValidationError("cannot load vectors for an empty corpus")
    rows: dict[int, np.ndarray] = {}
    dim: int | None = None
    for lineno, key, raw_vector in _read_vector_lines(path):
        ref = ArticleRef.from_key(key)
        position = corpus.by_ref.get(ref)
        if position is None:
            raise ValidationError(f"{path}:{lineno}: vector for unknown article {ref}")
        if position in rows:
            raise ValidationError(f"{path}:{lineno}: duplicate vector for article {ref}")
        vec = normalize(raw_vector)
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ValidationError(
                f"{path}:{lineno}: vector for {ref} has dim {vec.size}, expected {dim}"
            )
        rows[position] = vec
    missing = [a.ref for a in corpus.articles if corpus.by_ref[a.ref] not in rows]
    if missing:
        shown = ", ".join(str(r) for r in missing[:5])
        more = f" (and {len(missing) - 5} more)" if len(missing) > 5 else ""
        raise ValidationError(f"{path}: missing vectors for {shown}{more}")
    matrix = np.vstack([rows[i] for i in range(len(corpus.articles))])
    return DenseIndex(matrix, source=str(path))


def load_query_vectors(path: str | Path, n_queries: int) -> np.ndarray:
    """Load query vectors (ids ``q0``..``q<n-1>``) into a (n_queries, dim) table."""
    path = Path(path)
    rows: dict[int, np.ndarray] = {}
    dim: int | None = None
    for lineno, key, raw_vector in _read_vector_lines(path):
        if not key.startswith("q"):
            raise ParseError(f"{path}:{lineno}: query vector id {key!r} must start with 'q'")
        try:
            query_id = int(key[1:])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: malformed query vector id {key!r}") from None
        if not 0 <= query_id < n_queries:
            raise ValidationError(f"{path}:{lineno}: query id {query_id} out of range")
        if query_id in rows:
            raise ValidationError(f"{path}:{lineno}: duplicate vector for query {query_id}")
        vec = normalize(raw_vector)
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise ValidationError(f"{path}:{lineno}: vector dim {vec.size}, expected {dim}")
        rows[query_id] = vec
    missing = [i for i in range(n_queries) if i not in rows]
    if missing:
        raise ValidationError(f"{path}: missing vectors for queries {missing[:10]}")
    return np.vstack([rows[i] for i in range(n_queries)])


def save_vectors(path: str | Path, entries: Sequence[tuple[str, np.ndarray]]) -> None:
    """Write (id, vector) pairs in the vector file format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for key, vector in entries:
            record = {"id": key, "vector": [float(x) for x in vector]}
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


class EmbeddingProvider:
    """HTTP client for an embedding service (POST /embed, GET /info).

    Responses are matched to inputs positionally within one request and by
    explicit batch index across concurrent requests, never by arrival order.
    Query embeddings are cached by exact text so evaluation runs stay
    repeatable and provider-light.
    """

    def __init__(self, base_url: str, timeout: float = 60.0, batch_size: int = 32):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_size = batch_size
        self._cache: dict[str, np.ndarray] = {}
        self._info: dict | None = None

    def info(self) -> dict:
        if self._info is None:
            try:
                resp = requests.get(f"{self.base_url}/info", timeout=self.timeout)
                resp.raise_for_status()
                payload = resp.json()
            except (requests.RequestException, ValueError) as exc:
                raise ProviderError(f"provider /info failed: {exc}") from exc
            if not isinstance(payload, dict) or not isinstance(payload.get("dim"), int):
                raise ProviderError(f"provider /info returned malformed payload: {payload!r}")
            self._info = payload
        return self._info

    @property
    def dim(self) -> int:
        return int(self.info()["dim"])

    def _post_embed(self, texts: list[str]) -> list[np.ndarray]:
        try:
            resp = requests.post(
                f"{self.base_url}/embed", json={"texts": texts}, timeout=self.timeout
            )
            resp.raise_for_status()
            payload = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise ProviderError(f"provider /embed failed: {exc}") from exc
        vectors = payload.get("vectors") if isinstance(payload, dict) else None
        dim = payload.get("dim") if isinstance(payload, dict) else None
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError(
                f"provider returned {len(vectors) if isinstance(vectors, list) else 'no'} "
                f"vectors for {len(texts)} texts"
            )
        out = []
        for row in vectors:
            vec = normalize(row)
            if vec.size != dim:
                raise ProviderError(f"provider row dim {vec.size} != declared dim {dim}")
            out.append(vec)
        return out

    def embed(self, text: str) -> np.ndarray:
        """Embed one query text (normalized), with caching."""
        cached = self._cache.get(text)
        if cached is None:
            cached = self._post_embed([text])[0]
            self._cache[text] = cached
        return cached

    def embed_many(self, texts: list[str], max_workers: int = 1) -> np.ndarray:
        """Embed a batch of texts into a (len(texts), dim) table, order-preserving."""
        if not texts:
            raise ValidationError("embed_many needs at least one text")
        chunks = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        results: list[list[np.ndarray] | None] = [None] * len(chunks)
        if max_workers <= 1:
            for i, chunk in enumerate(chunks):
                results[i] = self._post_embed(chunk)
        else:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                futures = {pool.submit(self._post_embed, chunk): i for i, chunk in enumerate(chunks)}
                for future, i in futures.items():
                    results[i] = future.result()
        rows = [vec for chunk in results for vec in chunk]  # type: ignore[union-attr]
        return np.vstack(rows)


def build_dense_index_from_provider(
    provider: EmbeddingProvider, corpus: Corpus, max_workers: int = 1
) -> DenseIndex:
    """Embed every article's combined text through the provider."""
    matrix = provider.embed_many([a.combined for a in corpus.articles], max_workers=max_workers)
    return DenseIndex(matrix, source=provider.base_url)

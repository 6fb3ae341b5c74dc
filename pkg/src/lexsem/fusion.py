"""Score fusion, full-corpus ranking, and threshold-band answer selection.

Run file: JSON lines, one query per line,
``{"query_id": n, "hits": [{"law_id", "article_id", "lexical", "semantic", "fused"}, ...]}``
with hits already ranked by fused score.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bm25 import Bm25Index
from .corpus import ArticleRef, Corpus
from .dense import DenseIndex
from .errors import ParseError, ValidationError

FUSION_KINDS = ("sqrt_prod", "prod", "linear", "lexical_only", "semantic_only")


@dataclass(frozen=True)
class FusionMethod:
    kind: str
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in FUSION_KINDS:
            raise ValueError(f"unknown fusion kind {self.kind!r}; expected one of {FUSION_KINDS}")
        if self.kind == "linear":
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValueError(f"linear fusion needs alpha in [0, 1], got {self.alpha}")
        elif self.alpha is not None:
            raise ValueError(f"alpha is only meaningful for linear fusion, got kind={self.kind}")

    @property
    def needs_lexical(self) -> bool:
        return self.kind != "semantic_only"

    @property
    def needs_semantic(self) -> bool:
        return self.kind != "lexical_only"


@dataclass(frozen=True)
class ScoredHit:
    ref: ArticleRef
    lexical: float
    semantic: float
    fused: float


@dataclass(frozen=True)
class SelectionConfig:
    threshold: float = 0.0
    max_k: int = 20

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ValueError(f"threshold must be non-negative, got {self.threshold}")
        if self.max_k < 1:
            raise ValueError(f"max_k must be >= 1, got {self.max_k}")


def fuse(lexical: float, semantic: float, method: FusionMethod) -> float:
    """Combine one (lexical, semantic) score pair."""
    kind = method.kind
    if kind == "sqrt_prod":
        if lexical < 0:
            raise ValueError(f"sqrt_prod needs a non-negative lexical score, got {lexical}")
        return math.sqrt(lexical) * semantic
    if kind == "prod":
        return lexical * semantic
    if kind == "linear":
        return (1.0 - method.alpha) * lexical + method.alpha * semantic
    if kind == "lexical_only":
        return lexical
    return semantic


def fuse_arrays(lexical: np.ndarray, semantic: np.ndarray, method: FusionMethod) -> np.ndarray:
    """Vectorized fuse(); bitwise-identical to the scalar form per element."""
    kind = method.kind
    if kind == "sqrt_prod":
        if np.any(lexical < 0):
            raise ValueError("sqrt_prod needs non-negative lexical scores")
        return np.sqrt(lexical) * semantic
    if kind == "prod":
        return lexical * semantic
    if kind == "linear":
        return (1.0 - method.alpha) * lexical + method.alpha * semantic
    if kind == "lexical_only":
        return lexical.copy()
    return semantic.copy()


def rank(
    corpus: Corpus,
    lexical_index: Bm25Index | None,
    dense_index: DenseIndex | None,
    query_tokens: Sequence[str],
    query_vector: np.ndarray | None,
    method: FusionMethod,
    candidate_pool: int | None = None,
    limit: int | None = None,
) -> list[ScoredHit]:
    """Rank articles by fused score (non-increasing, ties by ascending position).

    Fusion runs over the full corpus unless ``candidate_pool`` restricts it to
    the lexical top-N.  An index may be omitted only when the method ignores
    that side; the missing side is recorded as 0.0 in the hits.
    """
    n = len(corpus.articles)
    if n == 0:
        raise ValidationError("cannot rank over an empty corpus")
    if method.needs_lexical and lexical_index is None:
        raise ValidationError(f"{method.kind} fusion needs a lexical index")
    if method.needs_semantic and (dense_index is None or query_vector is None):
        raise ValidationError(f"{method.kind} fusion needs a dense index and a query vector")
    if lexical_index is not None and lexical_index.n_docs != n:
        raise ValidationError(
            f"lexical index covers {lexical_index.n_docs} articles, corpus has {n}"
        )
    if dense_index is not None and dense_index.n_articles != n:
        raise ValidationError(
            f"dense index covers {dense_index.n_articles} articles, corpus has {n}"
        )

    lexical = lexical_index.scores(query_tokens) if lexical_index is not None else np.zeros(n)
    if dense_index is not None and query_vector is not None:
        semantic = dense_index.scores(query_vector)
    else:
        semantic = np.zeros(n)

    if candidate_pool is not None:
        if candidate_pool < 1:
            raise ValueError(f"candidate pool must be >= 1, got {candidate_pool}")
        if lexical_index is None:
            raise ValidationError("candidate pooling needs a lexical index")
        pool = np.sort(np.array([p for p, _ in lexical_index.top_k(query_tokens, candidate_pool)]))
    else:
        pool = np.arange(n)

    fused = fuse_arrays(lexical[pool], semantic[pool], method)
    order = np.argsort(-fused, kind="stable")
    if limit is not None:
        order = order[:limit]
    return [
        ScoredHit(
            ref=corpus.articles[int(pool[i])].ref,
            lexical=float(lexical[pool[i]]),
            semantic=float(semantic[pool[i]]),
            fused=float(fused[i]),
        )
        for i in order
    ]


def select(ranked: Sequence[ScoredHit], config: SelectionConfig) -> list[ScoredHit]:
    """Keep hits whose fused score is within ``threshold`` of the per-query
    maximum, capped at ``max_k``.  Always contains the top-1 hit."""
    if not ranked:
        raise ValidationError("cannot select from an empty ranking")
    cutoff = ranked[0].fused - config.threshold
    out: list[ScoredHit] = []
    for hit in ranked:
        if hit.fused < cutoff or len(out) >= config.max_k:
            break
        out.append(hit)
    return out


def write_run(path: str | Path, entries: Iterable[tuple[int, Sequence[ScoredHit]]]) -> None:
    """Write per-query rankings; deterministic byte-for-byte for equal inputs."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for query_id, hits in entries:
            record = {
                "query_id": query_id,
                "hits": [
                    {
                        "law_id": h.ref.law_id,
                        "article_id": h.ref.article_id,
                        "lexical": h.lexical,
                        "semantic": h.semantic,
                        "fused": h.fused,
                    }
                    for h in hits
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_run(path: str | Path) -> dict[int, list[ScoredHit]]:
    """Read a run file back into query_id -> ranked hits."""
    path = Path(path)
    run: dict[int, list[ScoredHit]] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            try:
                query_id = int(record["query_id"])
                hits = [
                    ScoredHit(
                        ref=ArticleRef(h["law_id"], h["article_id"]),
                        lexical=float(h["lexical"]),
                        semantic=float(h["semantic"]),
                        fused=float(h["fused"]),
                    )
                    for h in record["hits"]
                ]
            except (KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed run record ({exc})") from exc
            if query_id in run:
                raise ValidationError(f"{path}:{lineno}: duplicate query_id {query_id}")
            run[query_id] = hits
    return run

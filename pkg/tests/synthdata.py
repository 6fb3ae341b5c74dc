"""Synthetic retrieval corpus with planted queries.

Each query gets 1-3 gold articles that (a) share two rare marker terms with
the query and (b) have vectors with cosine >= 0.9 to the query vector, while
every non-gold article stays below 0.3 (in fact exactly 0 by construction:
query vectors use one axis each, filler vectors live in the remaining axes).
Gold articles of one query have identical token statistics, so only their
vector noise separates their fused scores.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def build_synthetic(
    root: Path,
    n_articles: int = 500,
    n_queries: int = 50,
    dim: int = 64,
    vocab_size: int = 200,
    articles_per_law: int = 20,
    seed: int = 7,
) -> dict:
    assert dim > n_queries, "need spare axes for filler vectors"
    rng = np.random.default_rng(seed)
    vocab = [f"từ{i:03d}" for i in range(vocab_size)]

    gold_counts = [1 + (q % 3) for q in range(n_queries)]
    assert sum(gold_counts) <= n_articles
    pool = rng.permutation(n_articles).tolist()
    golds: dict[int, list[int]] = {}
    cursor = 0
    for q, count in enumerate(gold_counts):
        golds[q] = sorted(pool[cursor : cursor + count])
        cursor += count
    gold_owner = {pos: q for q, positions in golds.items() for pos in positions}

    def fillers(k):
        return [vocab[int(i)] for i in rng.integers(0, vocab_size, size=k)]

    # article texts: gold bodies start with the two query markers
    titles, bodies = [], []
    for pos in range(n_articles):
        title_words = fillers(2)
        q = gold_owner.get(pos)
        if q is None:
            body_words = fillers(10)
        else:
            body_words = [f"mốc{q}a", f"mốc{q}b"] + fillers(8)
        titles.append(" ".join(title_words))
        bodies.append(" ".join(body_words))

    # queries: both markers plus three fillers absent from every gold article
    questions = []
    for q in range(n_queries):
        gold_tokens = set()
        for pos in golds[q]:
            gold_tokens.update(titles[pos].split())
            gold_tokens.update(bodies[pos].split())
        extra = []
        while len(extra) < 3:
            word = vocab[int(rng.integers(0, vocab_size))]
            if word not in gold_tokens and word not in extra:
                extra.append(word)
        questions.append(" ".join([f"mốc{q}a", f"mốc{q}b"] + extra))

    # vectors: query q uses axis q; gold vectors lean on that axis with
    # cosine in [0.92, 0.95]; filler vectors live in the spare axes
    article_vectors = np.zeros((n_articles, dim))
    spare = np.arange(n_queries, dim)
    for pos in range(n_articles):
        q = gold_owner.get(pos)
        if q is None:
            v = np.zeros(dim)
            v[spare] = rng.normal(size=spare.size)
            article_vectors[pos] = v / np.linalg.norm(v)
        else:
            c = float(rng.uniform(0.92, 0.95))
            v = np.zeros(dim)
            v[q] = c
            v[int(rng.choice(spare))] = math.sqrt(1.0 - c * c)
            article_vectors[pos] = v

    paths = {
        "corpus": root / "corpus.jsonl",
        "qa": root / "qa.jsonl",
        "vectors": root / "vectors.jsonl",
        "query_vectors": root / "query_vectors.jsonl",
    }

    def law_id(i):
        return f"{i + 1:02d}/2020/TEST"

    def article_id(pos):
        return str(pos % articles_per_law + 1)

    with paths["corpus"].open("w", encoding="utf-8") as fh:
        for law_index in range(0, n_articles, articles_per_law):
            record = {
                "law_id": law_id(law_index // articles_per_law),
                "articles": [
                    {"article_id": article_id(pos), "title": titles[pos], "text": bodies[pos]}
                    for pos in range(law_index, min(law_index + articles_per_law, n_articles))
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    def ref_of(pos):
        return {
            "law_id": law_id(pos // articles_per_law),
            "article_id": article_id(pos),
        }

    with paths["qa"].open("w", encoding="utf-8") as fh:
        for q in range(n_queries):
            record = {
                "question": questions[q],
                "relevant_articles": [ref_of(pos) for pos in golds[q]],
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    with paths["vectors"].open("w", encoding="utf-8") as fh:
        for pos in range(n_articles):
            ref = ref_of(pos)
            record = {
                "id": f"{ref['law_id']}#{ref['article_id']}",
                "vector": article_vectors[pos].tolist(),
            }
            fh.write(json.dumps(record) + "\n")

    with paths["query_vectors"].open("w", encoding="utf-8") as fh:
        for q in range(n_queries):
            vector = np.zeros(dim)
            vector[q] = 1.0
            fh.write(json.dumps({"id": f"q{q}", "vector": vector.tolist()}) + "\n")

    return {
        "paths": paths,
        "golds": golds,
        "gold_refs": {
            q: [(ref_of(pos)["law_id"], ref_of(pos)["article_id"]) for pos in positions]
            for q, positions in golds.items()
        },
        "questions": questions,
    }

"""Inverted index with lower-bounded Okapi scoring (BM25+).

Score of document d for query Q:

    sum over q in Q of  idf(q) * (delta + f*(k1+1) / (f + k1*(1 - b + b*(dl/avgdl))))

with idf(q) = ln((N+1)/n_q), f the in-document frequency, dl the document
length, and n_q the number of documents containing q.  Query terms absent from
the whole corpus contribute nothing; terms present anywhere contribute at
least idf*delta to every document, so all scores are non-negative (idf > 0
because n_q <= N < N+1).  That floor is what downstream sqrt-fusion relies on.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError

INDEX_FORMAT = "bm25plus-index"
INDEX_VERSION = 1


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.5
    b: float = 0.75
    delta: float = 1.0

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")


class Bm25Index:
    """Immutable term -> (positions, frequencies) postings with BM25+ scoring."""

    def __init__(
        self,
        postings: dict[str, tuple[np.ndarray, np.ndarray]],
        doc_len: np.ndarray,
        avgdl: float,
        params: Bm25Params,
    ):
        self.postings = postings
        self.doc_len = doc_len
        self.avgdl = avgdl
        self.params = params
        self.n_docs = int(doc_len.size)
        # length-normalization denominator, precomputed per document
        safe_avgdl = avgdl if avgdl > 0 else 1.0
        self._norm = params.k1 * (1.0 - params.b + params.b * (doc_len / safe_avgdl))

    @property
    def vocab_size(self) -> int:
        return len(self.postings)

    def idf(self, term: str) -> float:
        entry = self.postings.get(term)
        if entry is None:
            return 0.0
        return math.log((self.n_docs + 1) / entry[0].size)

    def scores(self, query: Sequence[str]) -> np.ndarray:
        """BM25+ scores of every document for ``query`` (repeated terms count twice)."""
        k1 = self.params.k1
        delta = self.params.delta
        total = np.zeros(self.n_docs)
        for term in query:
            entry = self.postings.get(term)
            if entry is None:
                continue
            positions, freqs = entry
            idf = math.log((self.n_docs + 1) / positions.size)
            tf_part = np.zeros(self.n_docs)
            tf_part[positions] = (freqs * (k1 + 1.0)) / (freqs + self._norm[positions])
            total += idf * (delta + tf_part)
        return total

    def score(self, query: Sequence[str], position: int) -> float:
        """Score of a single document; identical arithmetic to scores()."""
        if not 0 <= position < self.n_docs:
            raise IndexError(f"article position {position} out of range [0, {self.n_docs})")
        k1 = self.params.k1
        delta = self.params.delta
        total = 0.0
        for term in query:
            entry = self.postings.get(term)
            if entry is None:
                continue
            positions, freqs = entry
            idf = math.log((self.n_docs + 1) / positions.size)
            i = int(np.searchsorted(positions, position))
            if i < positions.size and positions[i] == position:
                f = float(freqs[i])
            else:
                f = 0.0
            tf_part = (f * (k1 + 1.0)) / (f + float(self._norm[position]))
            total += idf * (delta + tf_part)
        return total

    def top_k(self, query: Sequence[str], k: int) -> list[tuple[int, float]]:
        """Top-k (position, score), score-descending, ties by ascending position."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        scores = self.scores(query)
        order = np.argsort(-scores, kind="stable")[: min(k, self.n_docs)]
        return [(int(pos), float(scores[pos])) for pos in order]

    def top3_average(
        self, queries: Iterable[Sequence[str]]
    ) -> tuple[list[float], dict[str, float]]:
        """Per-query mean of the 3 highest scores, with a min/mean/max summary."""
        if self.n_docs < 3:
            raise ValidationError(f"top3_average needs at least 3 documents, have {self.n_docs}")
        means = []
        for query in queries:
            scores = self.scores(query)
            top3 = np.partition(scores, self.n_docs - 3)[self.n_docs - 3 :]
            means.append(float(top3.sum() / 3.0))
        if not means:
            raise ValidationError("top3_average needs at least one query")
        summary = {
            "min": min(means),
            "mean": sum(means) / len(means),
            "max": max(means),
        }
        return means, summary

    def save(self, path: str | Path) -> None:
        """Persist to a JSON-lines sidecar: header line, then one line per term."""
        path = Path(path)
        header = {
            "format": INDEX_FORMAT,
            "version": INDEX_VERSION,
            "n_docs": self.n_docs,
            "avgdl": self.avgdl,
            "params": {"k1": self.params.k1, "b": self.params.b, "delta": self.params.delta},
            "doc_len": [int(n) for n in self.doc_len],
        }
        with path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for term in sorted(self.postings):
                positions, freqs = self.postings[term]
                pairs = [[int(p), int(f)] for p, f in zip(positions, freqs)]
                fh.write(json.dumps({"t": term, "p": pairs}, ensure_ascii=False) + "\n")


def build_index(
    token_streams: Sequence[Sequence[str]], params: Bm25Params | None = None
) -> Bm25Index:
    """Index already-tokenized (and stopword-filtered) article token streams."""
    if params is None:
        params = Bm25Params()
    streams = list(token_streams)
    if not streams:
        raise ValidationError("cannot build an index over an empty corpus")
    doc_len = np.array([len(s) for s in streams], dtype=np.int64)
    avgdl = float(doc_len.sum()) / len(streams)
    raw: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for position, stream in enumerate(streams):
        for term, freq in Counter(stream).items():
            raw[term].append((position, freq))
    postings = {
        term: (
            np.array([p for p, _ in pairs], dtype=np.int64),
            np.array([f for _, f in pairs], dtype=np.float64),
        )
        for term, pairs in raw.items()
    }
    return Bm25Index(postings, doc_len, avgdl, params)


def load_index(path: str | Path) -> Bm25Index:
    """Reload a saved index; scores are reproduced exactly (same stored inputs)."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:1: invalid JSON header ({exc})") from exc
        if not isinstance(header, dict) or header.get("format") != INDEX_FORMAT:
            raise ParseError(f"{path}: not a {INDEX_FORMAT} file")
        if header.get("version") != INDEX_VERSION:
            raise ParseError(f"{path}: unsupported index version {header.get('version')!r}")
        params = Bm25Params(**header["params"])
        doc_len = np.array(header["doc_len"], dtype=np.int64)
        postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            pairs = record["p"]
            postings[record["t"]] = (
                np.array([p for p, _ in pairs], dtype=np.int64),
                np.array([f for _, f in pairs], dtype=np.float64),
            )
    index = Bm25Index(postings, doc_len, float(header["avgdl"]), params)
    if index.n_docs != header["n_docs"]:
        raise ParseError(f"{path}: header n_docs does not match doc_len table")
    return index

"""Legal corpus and QA dataset: loading, validation, and length statistics.

Corpus file: JSON lines, one law per line,
``{"law_id": "...", "articles": [{"article_id": "...", "title": "...", "text": "..."}]}``.
QA file: JSON lines, one query per line,
``{"question": "...", "relevant_articles": [{"law_id": "...", "article_id": "..."}]}``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError
from .text import TokenizerConfig, tokenize

logger = logging.getLogger(__name__)

BUCKET_LABELS = ("<100", "101-256", "257-512", "513+")
# upper bounds (inclusive) of the first three buckets; counts of exactly 100
# tokens fall in the first bucket
_BUCKET_EDGES = (100, 256, 512)


@dataclass(frozen=True)
class ArticleRef:
    """Identity of one article: the (law, article) id pair."""

    law_id: str
    article_id: str

    def __post_init__(self) -> None:
        if not self.law_id or not self.article_id:
            raise ValidationError(f"article reference needs non-empty ids, got {self!r}")

    @property
    def key(self) -> str:
        """Flat id used by vector files: ``law_id#article_id``."""
        return f"{self.law_id}#{self.article_id}"

    def __str__(self) -> str:
        return self.key

    @classmethod
    def from_key(cls, key: str) -> "ArticleRef":
        law_id, sep, article_id = key.rpartition("#")
        if not sep:
            raise ValidationError(f"article key {key!r} is not of the form law_id#article_id")
        return cls(law_id, article_id)


def combine_title_body(title: str, body: str) -> str:
    if title and body:
        return f"{title} {body}"
    return title or body


@dataclass(frozen=True)
class Article:
    ref: ArticleRef
    title: str
    body: str
    combined: str


@dataclass
class Corpus:
    documents: int
    articles: list[Article]
    by_ref: dict[ArticleRef, int]
    law_sizes: list[tuple[str, int]]

    def __len__(self) -> int:
        return len(self.articles)

    def position(self, ref: ArticleRef) -> int:
        try:
            return self.by_ref[ref]
        except KeyError:
            raise ValidationError(f"article {ref} not in corpus") from None


@dataclass(frozen=True)
class QARecord:
    query_id: int
    question: str
    relevant: tuple[ArticleRef, ...]

    @property
    def relevant_set(self) -> frozenset[ArticleRef]:
        return frozenset(self.relevant)


@dataclass(frozen=True)
class LengthHistogram:
    unit: str
    counts: tuple[int, int, int, int]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def proportions(self) -> tuple[float, ...]:
        total = self.total
        if total == 0:
            return (0.0,) * len(self.counts)
        return tuple(c / total for c in self.counts)

    def rows(self) -> list[tuple[str, int, float]]:
        return list(zip(BUCKET_LABELS, self.counts, self.proportions))


@dataclass(frozen=True)
class CoverageReport:
    n_queries: int
    corpus_articles: int
    distinct_articles: int
    fraction: float
    dangling: tuple[ArticleRef, ...]

    def to_dict(self) -> dict:
        return {
            "n_queries": self.n_queries,
            "corpus_articles": self.corpus_articles,
            "distinct_articles": self.distinct_articles,
            "fraction": self.fraction,
            "dangling": [str(ref) for ref in self.dangling],
        }


def _read_jsonl(path: Path):
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict):
                raise ParseError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def _require_str(record: dict, field: str, where: str) -> str:
    value = record.get(field)
    if not isinstance(value, str):
        raise ParseError(f"{where}: field {field!r} missing or not a string")
    return value


def load_corpus(path: str | Path) -> Corpus:
    """Load and validate a corpus file; duplicate article references are rejected."""
    path = Path(path)
    articles: list[Article] = []
    by_ref: dict[ArticleRef, int] = {}
    law_sizes: list[tuple[str, int]] = []
    for lineno, record in _read_jsonl(path):
        where = f"{path}:{lineno}"
        law_id = _require_str(record, "law_id", where)
        raw_articles = record.get("articles")
        if not isinstance(raw_articles, list):
            raise ParseError(f"{where}: field 'articles' missing or not a list")
        for i, raw in enumerate(raw_articles):
            if not isinstance(raw, dict):
                raise ParseError(f"{where}: article {i} is not an object")
            article_id = _require_str(raw, "article_id", f"{where} article {i}")
            title = raw.get("title", "")
            body = raw.get("text", "")
            if not isinstance(title, str) or not isinstance(body, str):
                raise ParseError(f"{where} article {i}: 'title'/'text' must be strings")
            ref = ArticleRef(law_id, article_id)
            if ref in by_ref:
                raise ValidationError(f"{where}: duplicate article reference {ref}")
            by_ref[ref] = len(articles)
            articles.append(Article(ref, title, body, combine_title_body(title, body)))
        law_sizes.append((law_id, len(raw_articles)))
    return Corpus(
        documents=len(law_sizes),
        articles=articles,
        by_ref=by_ref,
        law_sizes=law_sizes,
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back to the canonical file format (inverse of load_corpus)."""
    path = Path(path)
    pos = 0
    with path.open("w", encoding="utf-8") as fh:
        for law_id, size in corpus.law_sizes:
            rows = []
            for article in corpus.articles[pos : pos + size]:
                rows.append(
                    {
                        "article_id": article.ref.article_id,
                        "title": article.title,
                        "text": article.body,
                    }
                )
            pos += size
            fh.write(json.dumps({"law_id": law_id, "articles": rows}, ensure_ascii=False) + "\n")


def load_qa(path: str | Path) -> list[QARecord]:
    """Load a QA file; query ids are assigned by file order starting at 0.

    Duplicate refs inside one record are deduplicated with a warning; records
    with an empty relevant list are rejected.  Unknown fields are ignored.
    """
    path = Path(path)
    records: list[QARecord] = []
    for lineno, record in _read_jsonl(path):
        where = f"{path}:{lineno}"
        question = _require_str(record, "question", where)
        raw_refs = record.get("relevant_articles")
        if not isinstance(raw_refs, list):
            raise ParseError(f"{where}: field 'relevant_articles' missing or not a list")
        if not raw_refs:
            raise ValidationError(f"{where}: query has no relevant articles")
        refs: list[ArticleRef] = []
        seen: set[ArticleRef] = set()
        for i, raw in enumerate(raw_refs):
            if not isinstance(raw, dict):
                raise ParseError(f"{where}: relevant article {i} is not an object")
            ref = ArticleRef(
                _require_str(raw, "law_id", f"{where} relevant {i}"),
                _require_str(raw, "article_id", f"{where} relevant {i}"),
            )
            if ref in seen:
                logger.warning("%s: duplicate relevant article %s dropped", where, ref)
                continue
            seen.add(ref)
            refs.append(ref)
        records.append(QARecord(query_id=len(records), question=question, relevant=tuple(refs)))
    return records


def qa_coverage(corpus: Corpus, qa: list[QARecord]) -> CoverageReport:
    """How much of the corpus the QA gold sets actually touch, plus dangling refs."""
    present: set[ArticleRef] = set()
    dangling: set[ArticleRef] = set()
    for record in qa:
        for ref in record.relevant:
            if ref in corpus.by_ref:
                present.add(ref)
            else:
                dangling.add(ref)
    n_articles = len(corpus.articles)
    return CoverageReport(
        n_queries=len(qa),
        corpus_articles=n_articles,
        distinct_articles=len(present),
        fraction=len(present) / n_articles if n_articles else 0.0,
        dangling=tuple(sorted(dangling, key=lambda r: (r.law_id, r.article_id))),
    )


def _bucket_index(n_tokens: int) -> int:
    for i, edge in enumerate(_BUCKET_EDGES):
        if n_tokens <= edge:
            return i
    return len(_BUCKET_EDGES)


def length_histogram(corpus: Corpus, config: TokenizerConfig) -> LengthHistogram:
    """Bucket articles by token count of their combined title+body text."""
    counts = [0, 0, 0, 0]
    for article in corpus.articles:
        counts[_bucket_index(len(tokenize(article.combined, config)))] += 1
    return LengthHistogram(unit=config.unit, counts=tuple(counts))

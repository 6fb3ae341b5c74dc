"""Hybrid lexical + semantic retrieval engine for article-level legal corpora."""

__version__ = "0.1.0"

from .bm25 import Bm25Index, Bm25Params, build_index, load_index
from .corpus import (
    Article,
    ArticleRef,
    Corpus,
    CoverageReport,
    LengthHistogram,
    QARecord,
    length_histogram,
    load_corpus,
    load_qa,
    qa_coverage,
    save_corpus,
)
from .dense import DenseIndex, EmbeddingProvider, cosine, load_query_vectors, load_vectors
from .errors import ParseError, ProviderError, RetrievalError, ValidationError
from .evaluation import (
    EvalConfig,
    EvalReport,
    breakdown_by_num_relevant,
    evaluate_run,
    f2,
    recall_at_k,
    sweep_threshold,
)
from .fusion import (
    FusionMethod,
    ScoredHit,
    SelectionConfig,
    fuse,
    rank,
    read_run,
    select,
    write_run,
)
from .mining import MiningConfig, TrainingPair, export_pairs, load_pairs, mine
from .text import TokenizerConfig, load_stopwords, remove_stopwords, tokenize

__all__ = [
    "Article",
    "ArticleRef",
    "Bm25Index",
    "Bm25Params",
    "Corpus",
    "CoverageReport",
    "DenseIndex",
    "EmbeddingProvider",
    "EvalConfig",
    "EvalReport",
    "FusionMethod",
    "LengthHistogram",
    "MiningConfig",
    "ParseError",
    "ProviderError",
    "QARecord",
    "RetrievalError",
    "ScoredHit",
    "SelectionConfig",
    "TokenizerConfig",
    "TrainingPair",
    "ValidationError",
    "breakdown_by_num_relevant",
    "build_index",
    "cosine",
    "evaluate_run",
    "export_pairs",
    "f2",
    "fuse",
    "length_histogram",
    "load_corpus",
    "load_index",
    "load_pairs",
    "load_qa",
    "load_query_vectors",
    "load_stopwords",
    "load_vectors",
    "mine",
    "qa_coverage",
    "rank",
    "read_run",
    "recall_at_k",
    "remove_stopwords",
    "save_corpus",
    "select",
    "sweep_threshold",
    "tokenize",
    "write_run",
]

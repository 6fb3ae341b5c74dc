"""Command-line entry point for the retrieval pipeline.

Subcommands: stats, build-lexical, bm25-search, load-vectors, search, run,
mine, eval, sweep.  Each writes its declared artifact plus one machine-readable
JSON summary line on stdout.  Reporting commands also render figures next to
their delimited output unless --no-figures is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .bm25 import INDEX_VERSION, Bm25Index, Bm25Params, build_index, load_index
from .corpus import Corpus, length_histogram, load_corpus, load_qa, qa_coverage
from .dense import (
    EmbeddingProvider,
    build_dense_index_from_provider,
    load_query_vectors,
    load_vectors,
)
from .errors import RetrievalError, ValidationError
from .evaluation import evaluate_run, sweep_threshold
from .fusion import FusionMethod, rank, read_run, write_run
from .mining import MiningConfig, export_pairs, mine
from .text import TokenizerConfig, load_stopwords, remove_stopwords, tokenize, tokenize_texts

VERSION_LINE = (
    f"lexsem {__version__} (index format v{INDEX_VERSION}, run/pair/vector formats v1)"
)

FUSION_CHOICES = ("sqrt_prod", "prod", "linear", "lexical_only", "semantic_only")


@dataclass
class RunManifest:
    """Everything needed to reproduce one end-to-end retrieval run."""

    corpus: str
    qa: str
    tokenizer: str = "word"
    lowercase: bool = True
    stopwords: str | None = None
    k1: float = 1.5
    b: float = 0.75
    delta: float = 1.0
    vectors: str | None = None
    query_vectors: str | None = None
    provider: str | None = None
    fusion: str = "sqrt_prod"
    alpha: float | None = None
    candidate_pool: int | None = None
    depth: int = 100
    recall_k: int = 20
    threshold: float = 0.0
    max_k: int = 20
    seed: int = 0

    def validate(self) -> None:
        method = FusionMethod(self.fusion, self.alpha)
        if method.needs_semantic:
            if bool(self.vectors) == bool(self.provider):
                raise ValidationError(
                    "dense retrieval needs exactly one of --vectors or --provider"
                )
            if self.vectors and not self.query_vectors:
                raise ValidationError("--vectors also needs --query-vectors for the queries")
        if self.depth < 1 or self.recall_k < 1:
            raise ValidationError("ranking depth and recall k must be >= 1")
        if self.depth < max(self.recall_k, self.max_k):
            raise ValidationError(
                f"depth {self.depth} is shallower than recall_k/max_k "
                f"({self.recall_k}/{self.max_k})"
            )


def _summary(payload: dict) -> None:
    print(json.dumps(payload, ensure_ascii=False))


def _add_tokenizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--tokenizer",
        "--unit",
        dest="tokenizer",
        choices=("syllable", "word"),
        default="word",
        help="token unit (word expects pre-segmented underscore compounds)",
    )
    parser.add_argument("--no-lowercase", action="store_true", help="keep original casing")
    parser.add_argument("--stopwords", help="stopword file (one token per line)")


def _tokenizer_from_args(args) -> tuple[TokenizerConfig, set[str] | None]:
    config = TokenizerConfig(unit=args.tokenizer, lowercase=not args.no_lowercase)
    stoplist = load_stopwords(args.stopwords) if args.stopwords else None
    return config, stoplist


def _query_tokens(question: str, config: TokenizerConfig, stoplist: set[str] | None) -> list[str]:
    tokens = tokenize(question, config)
    return remove_stopwords(tokens, stoplist) if stoplist else tokens


def _index_meta_path(index_path: str | Path) -> Path:
    return Path(str(index_path) + ".meta.json")


def _build_lexical(corpus: Corpus, config: TokenizerConfig, stoplist, params: Bm25Params) -> Bm25Index:
    streams = tokenize_texts([a.combined for a in corpus.articles], config, stoplist)
    return build_index(streams, params)


def _load_or_build_index(args, corpus: Corpus):
    """Return (index, tokenizer config, stoplist) from --index or --corpus flags."""
    if getattr(args, "index", None):
        meta_path = _index_meta_path(args.index)
        if meta_path.exists():
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            config = TokenizerConfig(
                unit=meta["tokenizer"]["unit"], lowercase=meta["tokenizer"]["lowercase"]
            )
            stop_path = meta.get("stopwords")
        else:
            config = TokenizerConfig(unit=args.tokenizer, lowercase=not args.no_lowercase)
            stop_path = args.stopwords
        stoplist = load_stopwords(stop_path) if stop_path else None
        index = load_index(args.index)
        if index.n_docs != len(corpus.articles):
            raise ValidationError(
                f"index covers {index.n_docs} articles, corpus has {len(corpus.articles)}"
            )
        return index, config, stoplist
    config, stoplist = _tokenizer_from_args(args)
    params = Bm25Params(k1=args.k1, b=args.b, delta=args.delta)
    return _build_lexical(corpus, config, stoplist, params), config, stoplist


def _figures_enabled(args) -> bool:
    return not getattr(args, "no_figures", False)


# ---------------------------------------------------------------- subcommands


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    config = TokenizerConfig(unit=args.tokenizer, lowercase=True)
    hist = length_histogram(corpus, config)
    rows = hist.rows()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t")
            writer.writerow(["bucket", "count", "proportion"])
            for label, count, proportion in rows:
                writer.writerow([label, count, f"{proportion:.6f}"])
        if _figures_enabled(args):
            from . import plots

            plots.plot_length_histogram(hist, Path(args.out).with_suffix(".png"))
    else:
        print("bucket\tcount\tproportion")
        for label, count, proportion in rows:
            print(f"{label}\t{count}\t{proportion:.6f}")
    summary = {
        "command": "stats",
        "corpus": args.corpus,
        "unit": hist.unit,
        "documents": corpus.documents,
        "articles": len(corpus.articles),
        "buckets": {label: count for label, count, _ in rows},
        "out": args.out,
    }
    if args.qa:
        coverage = qa_coverage(corpus, load_qa(args.qa)).to_dict()
        if len(coverage["dangling"]) > 20:
            coverage["dangling"] = coverage["dangling"][:20]
            coverage["dangling_truncated"] = True
        summary["coverage"] = coverage
    _summary(summary)
    return 0


def cmd_build_lexical(args) -> int:
    corpus = load_corpus(args.corpus)
    config, stoplist = _tokenizer_from_args(args)
    params = Bm25Params(k1=args.k1, b=args.b, delta=args.delta)
    index = _build_lexical(corpus, config, stoplist, params)
    index.save(args.out)
    meta = {
        "tokenizer": {"unit": config.unit, "lowercase": config.lowercase},
        "stopwords": args.stopwords,
        "corpus": args.corpus,
    }
    _index_meta_path(args.out).write_text(
        json.dumps(meta, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    _summary(
        {
            "command": "build-lexical",
            "out": args.out,
            "n_docs": index.n_docs,
            "vocab": index.vocab_size,
            "avgdl": index.avgdl,
        }
    )
    return 0


def _resolve_queries(args, qa_records):
    """Yield (query_id, question) pairs from --query or --qa."""
    if args.query is not None:
        return [(0, args.query)]
    return [(record.query_id, record.question) for record in qa_records]


def _search_common(args, method: FusionMethod) -> int:
    if args.k < 1:
        raise ValidationError(f"--k must be >= 1, got {args.k}")
    corpus = load_corpus(args.corpus)
    if method.needs_lexical or getattr(args, "candidate_pool", None) or getattr(args, "top3", False):
        index, config, stoplist = _load_or_build_index(args, corpus)
    else:
        index = None
        config, stoplist = _tokenizer_from_args(args)
    qa_records = load_qa(args.qa) if args.qa else []
    if args.query is None and not qa_records:
        raise ValidationError("need --query or a non-empty --qa file")
    queries = _resolve_queries(args, qa_records)

    dense_index = None
    query_vec = None
    if method.needs_semantic:
        vectors = getattr(args, "vectors", None)
        provider_url = getattr(args, "provider", None)
        if bool(vectors) == bool(provider_url):
            raise ValidationError("dense retrieval needs exactly one of --vectors or --provider")
        if provider_url:
            provider = EmbeddingProvider(provider_url)
            dense_index = build_dense_index_from_provider(provider, corpus)
            if provider.dim != dense_index.dim:
                raise ValidationError(
                    f"provider dim {provider.dim} != article vectors dim {dense_index.dim}"
                )
            query_vec = lambda qid, question: provider.embed(question)  # noqa: E731
        else:
            dense_index = load_vectors(vectors, corpus)
            if args.query_vectors:
                table = load_query_vectors(args.query_vectors, len(qa_records) or 1)
                if table.shape[1] != dense_index.dim:
                    raise ValidationError(
                        f"query vectors dim {table.shape[1]} != article vectors dim {dense_index.dim}"
                    )
                query_vec = lambda qid, question: table[qid]  # noqa: E731
            else:
                raise ValidationError("--vectors also needs --query-vectors for the queries")

    entries = []
    for query_id, question in queries:
        tokens = _query_tokens(question, config, stoplist)
        qv = query_vec(query_id, question) if query_vec is not None else None
        hits = rank(
            corpus,
            index,
            dense_index,
            tokens,
            qv,
            method,
            candidate_pool=getattr(args, "candidate_pool", None),
            limit=args.k,
        )
        entries.append((query_id, hits))
    write_run(args.out, entries)

    summary = {
        "command": args.command,
        "fusion": method.kind,
        "queries": len(entries),
        "depth": args.k,
        "out": args.out,
    }
    if getattr(args, "top3", False):
        token_streams = [_query_tokens(q, config, stoplist) for _, q in queries]
        means, stats = index.top3_average(token_streams)
        summary["top3"] = stats
        if args.out and _figures_enabled(args):
            from . import plots

            plots.plot_top3_histogram(means, Path(args.out).with_suffix(".top3.png"))
    _summary(summary)
    return 0


def cmd_bm25_search(args) -> int:
    return _search_common(args, FusionMethod("lexical_only"))


def cmd_search(args) -> int:
    alpha = args.alpha if args.fusion == "linear" else None
    return _search_common(args, FusionMethod(args.fusion, alpha))


def cmd_load_vectors(args) -> int:
    corpus = load_corpus(args.corpus)
    index = load_vectors(args.vectors, corpus)
    summary = {
        "command": "load-vectors",
        "vectors": args.vectors,
        "articles": index.n_articles,
        "dim": index.dim,
    }
    if args.out:
        Path(args.out).write_text(
            json.dumps(summary, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        summary["out"] = args.out
    _summary(summary)
    return 0


def _manifest_from_args(args) -> RunManifest:
    base: dict = {}
    if args.manifest:
        base = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    merged = dict(base)
    for field in fields(RunManifest):
        value = getattr(args, field.name, None)
        if value is not None:
            merged[field.name] = value
    if getattr(args, "no_lowercase", False):
        merged["lowercase"] = False
    unknown = set(merged) - {f.name for f in fields(RunManifest)}
    if unknown:
        raise ValidationError(f"manifest has unknown fields: {sorted(unknown)}")
    if "corpus" not in merged or "qa" not in merged:
        raise ValidationError("run needs --corpus and --qa (flags or manifest)")
    manifest = RunManifest(**merged)
    manifest.validate()
    return manifest


def cmd_run(args) -> int:
    manifest = _manifest_from_args(args)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    corpus = load_corpus(manifest.corpus)
    qa = load_qa(manifest.qa)
    config = TokenizerConfig(unit=manifest.tokenizer, lowercase=manifest.lowercase)
    stoplist = load_stopwords(manifest.stopwords) if manifest.stopwords else None
    params = Bm25Params(k1=manifest.k1, b=manifest.b, delta=manifest.delta)
    method = FusionMethod(manifest.fusion, manifest.alpha)

    index = _build_lexical(corpus, config, stoplist, params) if method.needs_lexical else None

    dense_index = None
    query_vec = None
    if method.needs_semantic:
        if manifest.provider:
            provider = EmbeddingProvider(manifest.provider)
            dense_index = build_dense_index_from_provider(provider, corpus)
            query_vec = lambda qid, question: provider.embed(question)  # noqa: E731
        else:
            dense_index = load_vectors(manifest.vectors, corpus)
            table = load_query_vectors(manifest.query_vectors, len(qa))
            if table.shape[1] != dense_index.dim:
                raise ValidationError(
                    f"query vectors dim {table.shape[1]} != article vectors dim {dense_index.dim}"
                )
            query_vec = lambda qid, question: table[qid]  # noqa: E731

    entries = []
    for record in qa:
        tokens = _query_tokens(record.question, config, stoplist)
        qv = query_vec(record.query_id, record.question) if query_vec is not None else None
        hits = rank(
            corpus,
            index,
            dense_index,
            tokens,
            qv,
            method,
            candidate_pool=manifest.candidate_pool,
            limit=manifest.depth,
        )
        entries.append((record.query_id, hits))

    run_path = outdir / "run.jsonl"
    write_run(run_path, entries)
    report = evaluate_run(
        dict(entries),
        qa,
        k_recall=manifest.recall_k,
        threshold=manifest.threshold,
        max_k=manifest.max_k,
    )
    report_path = outdir / "report.json"
    report_path.write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    _write_per_query_tsv(outdir / "per_query.tsv", report)
    (outdir / "manifest.json").write_text(
        json.dumps(asdict(manifest), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    if _figures_enabled(args):
        from . import plots

        plots.plot_breakdown(report.by_num_relevant, outdir / "breakdown.png")
    _summary(
        {
            "command": "run",
            "outdir": str(outdir),
            "queries": len(qa),
            "fusion": method.kind,
            "recall_at_k": report.recall_at_k,
            "f2": report.f2,
            "threshold": report.threshold,
        }
    )
    return 0


def _write_per_query_tsv(path: Path, report) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(
            ["query_id", "precision", "recall", "f2", "recall_at_k", "retrieved", "relevant"]
        )
        for row in report.per_query:
            writer.writerow(
                [
                    row.query_id,
                    f"{row.precision:.10g}",
                    f"{row.recall:.10g}",
                    f"{row.f2:.10g}",
                    f"{row.recall_at_k:.10g}",
                    row.retrieved,
                    row.relevant,
                ]
            )


def cmd_mine(args) -> int:
    qa = load_qa(args.qa)
    rankings = read_run(args.run)
    config = MiningConfig(round=args.round, k=args.k)
    pairs = mine(qa, rankings, config)
    export_pairs(pairs, args.out)
    _summary(
        {
            "command": "mine",
            "round": args.round,
            "k": config.effective_k,
            "queries": len(qa),
            "pairs": len(pairs),
            "out": args.out,
        }
    )
    return 0


def cmd_eval(args) -> int:
    qa = load_qa(args.qa)
    run = read_run(args.run)
    report = evaluate_run(
        run, qa, k_recall=args.k, threshold=args.threshold, max_k=args.max_k
    )
    out = Path(args.out)
    out.write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    if args.per_query:
        _write_per_query_tsv(Path(args.per_query), report)
    if _figures_enabled(args):
        from . import plots

        plots.plot_breakdown(report.by_num_relevant, out.with_suffix(".breakdown.png"))
    _summary(
        {
            "command": "eval",
            "out": args.out,
            "n_queries": report.n_queries,
            "recall_at_k": report.recall_at_k,
            "f2": report.f2,
            "threshold": report.threshold,
        }
    )
    return 0


def _parse_grid(spec: str) -> list[float]:
    try:
        start, step, end = (float(x) for x in spec.split(":"))
    except ValueError:
        raise ValidationError(f"grid must be start:step:end, got {spec!r}") from None
    if step <= 0 or end < start:
        raise ValidationError(f"grid must ascend, got {spec!r}")
    grid = []
    i = 0
    while True:
        value = start + i * step
        if value > end + 1e-12:
            break
        grid.append(round(value, 12))
        i += 1
    return grid


def cmd_sweep(args) -> int:
    qa = load_qa(args.qa)
    run = read_run(args.run)
    grid = _parse_grid(args.grid)
    result = sweep_threshold(run, qa, grid, max_k=args.max_k)
    out = Path(args.out)
    with out.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "f2"])
        for threshold, value in result.curve:
            writer.writerow([f"{threshold:.10g}", f"{value:.10g}"])
    if _figures_enabled(args):
        from . import plots

        plots.plot_threshold_curve(result.curve, result.best_threshold, out.with_suffix(".png"))
    _summary(
        {
            "command": "sweep",
            "out": args.out,
            "n_queries": len(qa),
            "best_threshold": result.best_threshold,
            "best_f2": result.best_f2,
            "grid_points": len(grid),
        }
    )
    return 0


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexsem",
        description="Hybrid lexical + semantic retrieval over article-level legal corpora.",
    )
    parser.add_argument("--version", action="version", version=VERSION_LINE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="corpus length histogram and QA coverage")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tokenizer", "--unit", dest="tokenizer", choices=("syllable", "word"), default="syllable")
    p.add_argument("--qa")
    p.add_argument("--out", help="TSV output path (default: print to stdout)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("build-lexical", help="build and persist the BM25+ index")
    p.add_argument("--corpus", required=True)
    _add_tokenizer_flags(p)
    p.add_argument("--k1", type=float, default=1.5)
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_lexical)

    def add_search_flags(p, dense: bool):
        p.add_argument("--corpus", required=True)
        p.add_argument("--index", help="prebuilt index file (skips in-memory build)")
        _add_tokenizer_flags(p)
        p.add_argument("--k1", type=float, default=1.5)
        p.add_argument("--b", type=float, default=0.75)
        p.add_argument("--delta", type=float, default=1.0)
        p.add_argument("--query", help="one ad-hoc query (query_id 0)")
        p.add_argument("--qa", help="QA file for batch queries")
        p.add_argument("--k", type=int, default=100, help="ranking depth kept per query")
        p.add_argument("--out", required=True)
        p.add_argument("--no-figures", action="store_true")
        if dense:
            p.add_argument("--vectors", help="article vector file")
            p.add_argument("--query-vectors", help="query vector file (with --vectors)")
            p.add_argument("--provider", help="embedding provider base URL")
            p.add_argument("--fusion", choices=FUSION_CHOICES, default="sqrt_prod")
            p.add_argument("--alpha", type=float, help="linear fusion weight")
            p.add_argument("--candidate-pool", type=int, help="restrict fusion to lexical top-N")

    p = sub.add_parser("bm25-search", help="lexical-only ranking to a run file")
    add_search_flags(p, dense=False)
    p.add_argument("--top3", action="store_true", help="report per-query top-3 score stats")
    p.set_defaults(func=cmd_bm25_search)

    p = sub.add_parser("search", help="hybrid ranking to a run file")
    add_search_flags(p, dense=True)
    p.set_defaults(func=cmd_search, top3=False)

    p = sub.add_parser("load-vectors", help="validate an article vector file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", help="write the validation summary as JSON")
    p.set_defaults(func=cmd_load_vectors)

    p = sub.add_parser("run", help="end-to-end: index, rank, select, evaluate, report")
    p.add_argument("--manifest", help="JSON manifest with defaults for the flags below")
    p.add_argument("--corpus")
    p.add_argument("--qa")
    p.add_argument("--tokenizer", "--unit", dest="tokenizer", choices=("syllable", "word"))
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--stopwords")
    p.add_argument("--k1", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--vectors")
    p.add_argument("--query-vectors", dest="query_vectors")
    p.add_argument("--provider")
    p.add_argument("--fusion", choices=FUSION_CHOICES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--candidate-pool", dest="candidate_pool", type=int)
    p.add_argument("--k", dest="depth", type=int, help="ranking depth kept per query")
    p.add_argument("--recall-k", dest="recall_k", type=int)
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-k", dest="max_k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--outdir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("mine", help="export hard-negative training pairs from a run file")
    p.add_argument("--qa", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--round", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--k", type=int, help="negatives per query (default: 35/20/15 by round)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("eval", help="score a run file against a QA file")
    p.add_argument("--run", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--k", type=int, default=20, help="recall cutoff")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--max-k", dest="max_k", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--per-query", dest="per_query", help="also write the per-query TSV table")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="sweep the selection threshold for best F2")
    p.add_argument("--run", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--grid", default="0:0.01:1", help="start:step:end")
    p.add_argument("--max-k", dest="max_k", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RetrievalError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

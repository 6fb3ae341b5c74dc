"""Macro recall@k and macro F2 scoring, threshold sweeps, and breakdowns.

recall@k is computed on the raw ranking (top-k cutoff); F2 is computed on the
threshold-band answer set.  Per-query F2 = 5PR / (4P + R), defined as 0 when
both precision and recall are 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Mapping, Sequence

from .corpus import ArticleRef, QARecord
from .errors import ValidationError
from .fusion import ScoredHit, SelectionConfig, select

DEFAULT_GRID = tuple(i / 100 for i in range(0, 101))


@dataclass(frozen=True)
class EvalConfig:
    k_recall: int = 20
    grid: tuple[float, ...] = DEFAULT_GRID

    def __post_init__(self) -> None:
        if self.k_recall < 1:
            raise ValueError(f"k_recall must be >= 1, got {self.k_recall}")
        _check_grid(self.grid)


def _check_grid(grid: Sequence[float]) -> None:
    if len(grid) == 0:
        raise ValueError("threshold grid must be non-empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("threshold grid must be strictly ascending")
    if grid[0] < 0:
        raise ValueError("thresholds must be non-negative")


@dataclass(frozen=True)
class QueryMetrics:
    query_id: int
    precision: float
    recall: float
    f2: float
    recall_at_k: float
    retrieved: int
    relevant: int

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "precision": self.precision,
            "recall": self.recall,
            "f2": self.f2,
            "recall_at_k": self.recall_at_k,
            "retrieved": self.retrieved,
            "relevant": self.relevant,
        }


@dataclass(frozen=True)
class GroupStats:
    label: str
    queries: int
    recall_at_k: float
    f2: float

    def to_dict(self) -> dict:
        return {
            "num_relevant": self.label,
            "queries": self.queries,
            "recall_at_k": self.recall_at_k,
            "f2": self.f2,
        }


@dataclass(frozen=True)
class EvalReport:
    k_recall: int
    threshold: float
    max_k: int
    n_queries: int
    recall_at_k: float
    f2: float
    per_query: tuple[QueryMetrics, ...]
    by_num_relevant: tuple[GroupStats, ...]

    def to_dict(self) -> dict:
        return {
            "k_recall": self.k_recall,
            "threshold": self.threshold,
            "max_k": self.max_k,
            "n_queries": self.n_queries,
            "recall_at_k": self.recall_at_k,
            "f2": self.f2,
            "by_num_relevant": [g.to_dict() for g in self.by_num_relevant],
            "per_query": [q.to_dict() for q in self.per_query],
        }


@dataclass(frozen=True)
class SweepResult:
    best_threshold: float
    best_f2: float
    curve: tuple[tuple[float, float], ...]  # (threshold, macro F2)


def _hits_for(run: Mapping[int, Sequence[ScoredHit]], record: QARecord) -> Sequence[ScoredHit]:
    hits = run.get(record.query_id)
    if hits is None:
        raise ValidationError(f"query {record.query_id} missing from run")
    return hits


def recall_at_k(
    run: Mapping[int, Sequence[ScoredHit]], qa: Sequence[QARecord], k: int
) -> tuple[float, dict[int, float]]:
    """Per-query |top-k ∩ relevant| / |relevant| and its unweighted mean."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not qa:
        raise ValidationError("no queries to evaluate")
    per_query: dict[int, float] = {}
    for record in qa:
        hits = _hits_for(run, record)
        top = {h.ref for h in hits[:k]}
        per_query[record.query_id] = len(top & record.relevant_set) / len(record.relevant)
    macro = sum(per_query.values()) / len(per_query)
    return macro, per_query


def f2_measure(precision: float, recall: float) -> float:
    denom = 4.0 * precision + recall
    if denom == 0.0:
        return 0.0
    return 5.0 * precision * recall / denom


def f2(
    selected: Mapping[int, Collection[ArticleRef]], qa: Sequence[QARecord]
) -> tuple[float, dict[int, tuple[float, float, float]]]:
    """Macro F2 over per-query answer sets; returns (macro, qid -> (P, R, F2)).

    An empty answer set scores precision 0 (hence F2 0); it is not an error.
    """
    if not qa:
        raise ValidationError("no queries to evaluate")
    per_query: dict[int, tuple[float, float, float]] = {}
    for record in qa:
        answer = selected.get(record.query_id)
        if answer is None:
            raise ValidationError(f"query {record.query_id} missing from selection")
        retrieved = set(answer)
        correct = len(retrieved & record.relevant_set)
        precision = correct / len(retrieved) if retrieved else 0.0
        recall = correct / len(record.relevant)
        per_query[record.query_id] = (precision, recall, f2_measure(precision, recall))
    macro = sum(v[2] for v in per_query.values()) / len(per_query)
    return macro, per_query


def select_answers(
    run: Mapping[int, Sequence[ScoredHit]], qa: Sequence[QARecord], config: SelectionConfig
) -> dict[int, list[ScoredHit]]:
    """Apply threshold-band selection to every query's ranking."""
    answers: dict[int, list[ScoredHit]] = {}
    for record in qa:
        hits = _hits_for(run, record)
        answers[record.query_id] = select(hits, config) if hits else []
    return answers


def _group_label(n_relevant: int) -> str:
    return "7+" if n_relevant >= 7 else str(n_relevant)


def breakdown_by_num_relevant(
    qa: Sequence[QARecord],
    recall_per_query: Mapping[int, float],
    f2_per_query: Mapping[int, float],
) -> list[GroupStats]:
    """Group queries by gold-set size (1..6, 7+); empty groups are omitted."""
    groups: dict[str, list[int]] = {}
    for record in qa:
        groups.setdefault(_group_label(len(record.relevant)), []).append(record.query_id)

    def sort_key(label: str) -> int:
        return 7 if label == "7+" else int(label)

    out = []
    for label in sorted(groups, key=sort_key):
        ids = groups[label]
        out.append(
            GroupStats(
                label=label,
                queries=len(ids),
                recall_at_k=sum(recall_per_query[q] for q in ids) / len(ids),
                f2=sum(f2_per_query[q] for q in ids) / len(ids),
            )
        )
    return out


def evaluate_run(
    run: Mapping[int, Sequence[ScoredHit]],
    qa: Sequence[QARecord],
    k_recall: int = 20,
    threshold: float = 0.0,
    max_k: int = 20,
) -> EvalReport:
    """Full report: recall@k on the raw ranking, F2 on the banded answer set."""
    macro_recall, recall_per_query = recall_at_k(run, qa, k_recall)
    answers = select_answers(run, qa, SelectionConfig(threshold=threshold, max_k=max_k))
    macro_f2, f2_per_query = f2(
        {qid: [h.ref for h in hits] for qid, hits in answers.items()}, qa
    )
    per_query = tuple(
        QueryMetrics(
            query_id=record.query_id,
            precision=f2_per_query[record.query_id][0],
            recall=f2_per_query[record.query_id][1],
            f2=f2_per_query[record.query_id][2],
            recall_at_k=recall_per_query[record.query_id],
            retrieved=len(answers[record.query_id]),
            relevant=len(record.relevant),
        )
        for record in qa
    )
    groups = breakdown_by_num_relevant(
        qa, recall_per_query, {qid: v[2] for qid, v in f2_per_query.items()}
    )
    return EvalReport(
        k_recall=k_recall,
        threshold=threshold,
        max_k=max_k,
        n_queries=len(qa),
        recall_at_k=macro_recall,
        f2=macro_f2,
        per_query=per_query,
        by_num_relevant=tuple(groups),
    )


def sweep_threshold(
    run: Mapping[int, Sequence[ScoredHit]],
    qa: Sequence[QARecord],
    grid: Sequence[float] = DEFAULT_GRID,
    max_k: int = 20,
) -> SweepResult:
    """Evaluate macro F2 at each grid threshold; ties go to the smallest one."""
    _check_grid(tuple(grid))
    curve: list[tuple[float, float]] = []
    best_threshold = None
    best_f2 = -1.0
    for threshold in grid:
        answers = select_answers(run, qa, SelectionConfig(threshold=threshold, max_k=max_k))
        macro, _ = f2({qid: [h.ref for h in hits] for qid, hits in answers.items()}, qa)
        curve.append((float(threshold), macro))
        if macro > best_f2:
            best_f2 = macro
            best_threshold = float(threshold)
    return SweepResult(best_threshold=best_threshold, best_f2=best_f2, curve=tuple(curve))

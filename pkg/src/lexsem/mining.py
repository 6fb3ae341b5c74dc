"""Round-based hard-negative mining for contrastive training pairs.

Per query, every gold article is emitted with label 1 and the top-k ranked
non-gold articles with label 0, giving k + |positives| pairs per query when
enough candidates exist.  Round defaults: 35, 20, 15 negatives.

Pair file: JSON lines
``{"query_id": n, "question": "...", "law_id": "...", "article_id": "...", "label": 0|1}``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import ArticleRef, QARecord
from .errors import ParseError, ValidationError
from .fusion import ScoredHit

logger = logging.getLogger(__name__)

ROUND_DEFAULT_K = {1: 35, 2: 20, 3: 15}


@dataclass(frozen=True)
class MiningConfig:
    round: int = 1
    k: int | None = None  # None -> the round's default

    def __post_init__(self) -> None:
        if self.round not in ROUND_DEFAULT_K:
            raise ValueError(f"round must be 1, 2, or 3, got {self.round}")
        if self.k is not None and self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def effective_k(self) -> int:
        return self.k if self.k is not None else ROUND_DEFAULT_K[self.round]


@dataclass(frozen=True)
class TrainingPair:
    query_id: int
    question: str
    ref: ArticleRef
    label: int


def mine(
    qa: Sequence[QARecord],
    rankings: Mapping[int, Sequence[ScoredHit]],
    config: MiningConfig,
) -> list[TrainingPair]:
    """Build training pairs: positives first, then top-k non-positive negatives
    in rank order.  Emits all available negatives with a warning when the
    ranking is too shallow."""
    k = config.effective_k
    pairs: list[TrainingPair] = []
    for record in qa:
        hits = rankings.get(record.query_id)
        if hits is None:
            raise ValidationError(f"query {record.query_id} missing from the ranking source")
        positives = set(record.relevant)
        for ref in record.relevant:
            pairs.append(TrainingPair(record.query_id, record.question, ref, 1))
        negatives = [h.ref for h in hits if h.ref not in positives][:k]
        if len(negatives) < k:
            logger.warning(
                "query %d: only %d of %d requested negatives available",
                record.query_id,
                len(negatives),
                k,
            )
        for ref in negatives:
            pairs.append(TrainingPair(record.query_id, record.question, ref, 0))
    return pairs


def export_pairs(pairs: Sequence[TrainingPair], path: str | Path) -> None:
    """Write pairs as JSON lines in stable order (byte-identical on rerun)."""
    if not pairs:
        raise ValidationError("no training pairs to export")
    with Path(path).open("w", encoding="utf-8") as fh:
        for pair in pairs:
            record = {
                "query_id": pair.query_id,
                "question": pair.question,
                "law_id": pair.ref.law_id,
                "article_id": pair.ref.article_id,
                "label": pair.label,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def load_pairs(path: str | Path) -> list[TrainingPair]:
    path = Path(path)
    pairs: list[TrainingPair] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pairs.append(
                    TrainingPair(
                        query_id=int(record["query_id"]),
                        question=record["question"],
                        ref=ArticleRef(record["law_id"], record["article_id"]),
                        label=int(record["label"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed pair record ({exc})") from exc
    return pairs

"""Render report figures to image files (no interactive backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .corpus import LengthHistogram
from .evaluation import GroupStats


def plot_length_histogram(hist: LengthHistogram, path: str | Path) -> None:
    labels = [label for label, _, _ in hist.rows()]
    counts = [count for _, count, _ in hist.rows()]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(labels, counts, color="#4878a8")
    ax.set_xlabel(f"article length ({hist.unit} tokens)")
    ax.set_ylabel("articles")
    ax.set_title("Distribution of article lengths")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_top3_histogram(values: Sequence[float], path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(values, bins=min(40, max(5, len(values) // 20 + 5)), color="#4878a8")
    ax.set_xlabel("mean of top-3 lexical scores")
    ax.set_ylabel("queries")
    ax.set_title("Per-query average of the 3 highest lexical scores")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_threshold_curve(
    curve: Sequence[tuple[float, float]], best_threshold: float, path: str | Path
) -> None:
    xs = [t for t, _ in curve]
    ys = [v for _, v in curve]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, color="#4878a8")
    ax.axvline(best_threshold, color="#a84848", linestyle="--", label=f"best = {best_threshold:g}")
    ax.set_xlabel("selection threshold")
    ax.set_ylabel("macro F2")
    ax.set_title("F2 vs. selection threshold")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_breakdown(groups: Sequence[GroupStats], path: str | Path) -> None:
    labels = [g.label for g in groups]
    x = range(len(groups))
    width = 0.38
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([i - width / 2 for i in x], [g.recall_at_k for g in groups], width, label="recall@k")
    ax.bar([i + width / 2 for i in x], [g.f2 for g in groups], width, label="F2")
    ax.set_xticks(list(x), labels)
    ax.set_xlabel("relevant articles per query")
    ax.set_ylabel("macro metric")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Metrics by number of relevant articles")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

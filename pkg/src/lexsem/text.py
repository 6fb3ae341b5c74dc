"""Tokenization and stopword handling for syllable- and word-level Vietnamese text.

Word segmentation itself is external: pre-segmented input marks multi-syllable
words by joining syllables with underscores ("bài_báo").  Word-level
tokenization preserves those compounds; syllable-level tokenization treats the
underscore as just another separator, so segmented text degrades gracefully
back to syllables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError

UNITS = ("syllable", "word")

# leading/trailing characters that are not letters, digits, or underscore
_EDGE_PUNCT = re.compile(r"^\W+|\W+$")


@dataclass(frozen=True)
class TokenizerConfig:
    unit: str = "word"
    lowercase: bool = True
    stopword_path: str | None = None

    def __post_init__(self) -> None:
        if self.unit not in UNITS:
            raise ValueError(f"unknown tokenizer unit {self.unit!r}; expected one of {UNITS}")


def tokenize(text: str, config: TokenizerConfig) -> list[str]:
    """Split ``text`` into tokens: whitespace-delimited chunks with surrounding
    punctuation stripped and purely punctuational chunks dropped."""
    if config.unit == "syllable":
        text = text.replace("_", " ")
    if config.lowercase:
        text = text.lower()
    tokens = []
    for chunk in text.split():
        token = _EDGE_PUNCT.sub("", chunk)
        if token:
            tokens.append(token)
    return tokens


def remove_stopwords(tokens: list[str], stoplist: set[str]) -> list[str]:
    """Drop stoplist members, preserving the relative order of survivors.

    The stoplist must already be in the same normalization (e.g. lowercased)
    as the token stream.
    """
    return [t for t in tokens if t not in stoplist]


def load_stopwords(path: str | Path) -> set[str]:
    """Read a stopword file: UTF-8, one token per line, ``#`` lines are comments."""
    stoplist = set()
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if not token or token.startswith("#"):
                continue
            stoplist.add(token)
    if not stoplist:
        raise ValidationError(f"{path}: stopword file contains no tokens")
    return stoplist


def tokenize_texts(
    texts: list[str],
    config: TokenizerConfig,
    stopwords: set[str] | None = None,
) -> list[list[str]]:
    """Tokenize a batch of texts, optionally stopword-filtered."""
    streams = [tokenize(text, config) for text in texts]
    if stopwords:
        streams = [remove_stopwords(s, stopwords) for s in streams]
    return streams

"""Bag-of-words vocabulary over 1- and 2-grams with raw-count features."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from litscreen.preprocess import TokenizedDoc


@dataclass(frozen=True)
class VocabularyConfig:
    min_df: int = 2
    max_size: int | None = None
    lowercase: bool = True  # tokens arrive lowercased; recorded for disclosure

    def __post_init__(self) -> None:
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")
        if self.max_size is not None and self.max_size < 1:
            raise ValueError("max_size must be >= 1 when set")


@dataclass(frozen=True)
class Vocabulary:
    entries: dict[str, int]  # n-gram -> dense column index
    df: dict[str, int]
    config: VocabularyConfig

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse raw counts; indices strictly increasing."""

    indices: tuple[int, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.counts):
            raise ValueError("indices and counts must align")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")
        if any(c < 1 for c in self.counts):
            raise ValueError("counts must be >= 1")


def _doc_ngrams(doc: TokenizedDoc) -> Counter[str]:
    toks = [t.text for t in doc.tokens]
    grams = Counter(toks)
    grams.update(f"{a} {b}" for a, b in zip(toks, toks[1:]))
    return grams


def build_vocabulary(
    train_docs: list[TokenizedDoc], config: VocabularyConfig | None = None
) -> Vocabulary:
    """Collect 1-/2-grams, apply the df cutoff and size cap, index entries.

    Index assignment is lexicographic over the surviving entries, so equal
    corpora always produce identical vocabularies. The size cap keeps the
    highest-df entries, breaking df ties lexicographically.
    """
    cfg = config or VocabularyConfig()
    if not train_docs:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    df: Counter[str] = Counter()
    for doc in train_docs:
        df.update(_doc_ngrams(doc).keys())
    kept = [g for g, n in df.items() if n >= cfg.min_df]
    if cfg.max_size is not None and len(kept) > cfg.max_size:
        kept.sort(key=lambda g: (-df[g], g))
        kept = kept[: cfg.max_size]
    kept.sort()
    return Vocabulary(
        entries={g: i for i, g in enumerate(kept)},
        df={g: df[g] for g in kept},
        config=cfg,
    )


def featurize(doc: TokenizedDoc, vocab: Vocabulary) -> FeatureVector:
    """Raw in-vocabulary n-gram counts; out-of-vocabulary grams are ignored."""
    pairs = sorted(
        (vocab.entries[g], n)
        for g, n in _doc_ngrams(doc).items()
        if g in vocab.entries
    )
    return FeatureVector(
        indices=tuple(i for i, _ in pairs), counts=tuple(n for _, n in pairs)
    )

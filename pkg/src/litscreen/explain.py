"""Sentence-level explanations for scorer A.

Two modes share one perturbation unit, the sentence. Exhaustive ablation
scores the document once per removed sentence; the sampled mode fits a
weighted linear surrogate over random keep/drop masks. Removal is literal:
the remaining sentences are re-joined, so bigrams form across the new
adjacency exactly as they would in real text.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from itertools import product
from math import exp

import numpy as np

from litscreen.models.bundle import ModelBundle
from litscreen.models.vocab import FeatureVector, Vocabulary
from litscreen.preprocess import SentenceSpan, TokenizedDoc, check_envelope


class ExplanationError(ValueError):
    pass


class ExplanationMode(Enum):
    EXHAUSTIVE_ABLATION = "exhaustive_ablation"
    SAMPLED_LIME = "sampled_lime"


@dataclass(frozen=True)
class SentenceAttribution:
    """Signed influence of one sentence; positive supports SuspectAdverse."""

    sentence_index: int
    span: SentenceSpan
    influence: float


@dataclass(frozen=True)
class Explanation:
    article_id: str
    mode: ExplanationMode
    base_score: float
    attributions: tuple[SentenceAttribution, ...]

    def __post_init__(self) -> None:
        keys = [(-abs(a.influence), a.sentence_index) for a in self.attributions]
        if keys != sorted(keys):
            raise ExplanationError("attributions must sort by |influence| desc")

    def to_dict(self) -> dict:
        return {
            "article_id": self.article_id,
            "mode": self.mode.value,
            "base_score": self.base_score,
            "attributions": [
                {
                    "sentence_index": a.sentence_index,
                    "start": a.span.start,
                    "end": a.span.end,
                    "influence": a.influence,
                }
                for a in self.attributions
            ],
        }


def _sentence_tokens(doc: TokenizedDoc) -> list[list[str]]:
    """Token texts grouped by the sentence span that contains them."""
    starts = [s.start for s in doc.sentence_spans]
    grouped: list[list[str]] = [[] for _ in doc.sentence_spans]
    for tok in doc.tokens:
        i = max(bisect_right(starts, tok.start) - 1, 0)
        grouped[i].append(tok.text)
    return grouped


def _mask_features(
    sentences: list[list[str]], mask: tuple[int, ...], vocab: Vocabulary
) -> FeatureVector:
    toks = [t for keep, sent in zip(mask, sentences) if keep for t in sent]
    grams = Counter(toks)
    grams.update(f"{a} {b}" for a, b in zip(toks, toks[1:]))
    pairs = sorted(
        (vocab.entries[g], n) for g, n in grams.items() if g in vocab.entries
    )
    return FeatureVector(
        indices=tuple(i for i, _ in pairs), counts=tuple(n for _, n in pairs)
    )


def _proximity_weight(kept_fraction: float) -> float:
    return exp(-((1.0 - kept_fraction) ** 2) / 0.25)


def explain_prediction(
    doc: TokenizedDoc,
    bundle: ModelBundle,
    mode: ExplanationMode = ExplanationMode.EXHAUSTIVE_ABLATION,
    sample_count: int = 500,
    seed: int = 0,
) -> Explanation:
    """Rank sentences by influence on scorer A's output.

    Exhaustive ablation defines influence(i) as score(full) minus score with
    sentence i removed. The sampled mode draws keep/drop masks (each sentence
    kept with probability 0.5), scores each variant, and fits a weighted
    least-squares surrogate whose coefficients are the influences; when
    sample_count covers every mask of the document, the masks are enumerated
    instead of sampled. Deterministic given the seed.
    """
    if not check_envelope(doc, bundle.envelope).in_envelope:
        raise ExplanationError(f"document {doc.article_id!r} is out of envelope")
    n = len(doc.sentence_spans)
    if n == 0:
        raise ExplanationError("document has no sentences")
    if sample_count < 1:
        raise ExplanationError("sample_count must be >= 1")

    sentences = _sentence_tokens(doc)
    vocab = bundle.vocabulary
    scorer = bundle.scorer_a

    def masked_score(mask: tuple[int, ...]) -> float:
        return scorer.score(_mask_features(sentences, mask, vocab))

    base = masked_score((1,) * n)

    if mode is ExplanationMode.EXHAUSTIVE_ABLATION:
        influences = []
        for i in range(n):
            mask = tuple(int(j != i) for j in range(n))
            influences.append(base - masked_score(mask))
    else:
        if sample_count >= 2**n:  # full coverage; no need to sample
            masks = np.array(list(product((0, 1), repeat=n)), dtype=np.int64)
        else:
            rng = np.random.default_rng(seed)
            masks = rng.integers(0, 2, size=(sample_count, n), dtype=np.int64)
        scores = np.array([masked_score(tuple(m)) for m in masks])
        weights = np.array([_proximity_weight(m.sum() / n) for m in masks])
        design = np.hstack([masks.astype(float), np.ones((len(masks), 1))])
        sw = np.sqrt(weights)[:, np.newaxis]
        coef, *_ = np.linalg.lstsq(design * sw, scores * sw[:, 0], rcond=None)
        influences = [float(c) for c in coef[:n]]

    attributions = tuple(
        sorted(
            (
                SentenceAttribution(i, doc.sentence_spans[i], float(v))
                for i, v in enumerate(influences)
            ),
            key=lambda a: (-abs(a.influence), a.sentence_index),
        )
    )
    return Explanation(
        article_id=doc.article_id,
        mode=mode,
        base_score=base,
        attributions=attributions,
    )

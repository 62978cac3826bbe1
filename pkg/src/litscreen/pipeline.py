"""End-to-end screening of one article against a loaded model bundle.

Keeps the stage wiring (tokenize, envelope, score, patient patterns, rule
cascade) in one place so the service and the CLI cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass

from litscreen.corpus import Article
from litscreen.models.bundle import ModelBundle
from litscreen.models.vocab import featurize
from litscreen.preprocess import (
    TokenizedDoc,
    check_envelope,
    extract_patient_mentions,
    normalize_tokenize,
)
from litscreen.rules import ScreeningPrediction, apply_rule_cascade


@dataclass(frozen=True)
class ScreeningEngine:
    bundle: ModelBundle

    def screen(self, article: Article) -> tuple[TokenizedDoc, ScreeningPrediction]:
        """Tokenize, check the envelope, score if allowed, run the cascade."""
        doc = normalize_tokenize(article)
        verdict = check_envelope(doc, self.bundle.envelope)
        scores = None
        mentions = []
        if verdict.in_envelope:
            fv = featurize(doc, self.bundle.vocabulary)
            scores = (
                self.bundle.scorer_a.score(fv),
                self.bundle.scorer_b.score(fv),
            )
            mentions = extract_patient_mentions(doc, self.bundle.patterns)
        prediction = apply_rule_cascade(
            doc, verdict, mentions, scores, self.bundle.thresholds
        )
        return doc, prediction

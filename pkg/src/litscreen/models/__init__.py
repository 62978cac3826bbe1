"""Vocabulary building, the two scorer slots, and bundle persistence."""

from litscreen.models.bundle import (
    BundleIntegrityError,
    ModelBundle,
    load_bundle,
    save_bundle,
)
from litscreen.models.scorers import (
    ForestScorer,
    LogisticScorer,
    ScorerAConfig,
    ScorerBConfig,
    TrainingMeta,
    logistic_gradient,
    logistic_loss,
    score,
    train_scorer_a,
    train_scorer_b,
)
from litscreen.models.vocab import (
    FeatureVector,
    Vocabulary,
    VocabularyConfig,
    build_vocabulary,
    featurize,
)

__all__ = [
    "BundleIntegrityError",
    "FeatureVector",
    "ForestScorer",
    "LogisticScorer",
    "ModelBundle",
    "ScorerAConfig",
    "ScorerBConfig",
    "TrainingMeta",
    "Vocabulary",
    "VocabularyConfig",
    "build_vocabulary",
    "featurize",
    "load_bundle",
    "logistic_gradient",
    "logistic_loss",
    "save_bundle",
    "score",
    "train_scorer_a",
    "train_scorer_b",
]

"""Threshold calibration and the repeated-resampling evaluation protocol.

Calibration is an exhaustive grid search: minimize validation FPR subject
to validation recall >= target. Counts are integers throughout, so results
are exactly reproducible by brute force. The experiment harness trains the
scorers once on a fixed 90% split and re-samples only validation/test.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from litscreen.corpus import (
    Label,
    LabeledArticle,
    SplitSpec,
    corpus_digest,
    split_validation_test,
    stratified_split,
    upsample_minority,
)
from litscreen.models.bundle import ModelBundle
from litscreen.models.scorers import (
    ScorerAConfig,
    ScorerBConfig,
    train_scorer_a,
    train_scorer_b,
)
from litscreen.models.vocab import VocabularyConfig, build_vocabulary, featurize
from litscreen.preprocess import (
    EnvelopeConfig,
    PatientPatternConfig,
    TokenizedDoc,
    check_envelope,
    extract_patient_mentions,
    normalize_tokenize,
)
from litscreen.rules import RuleThresholds


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class CascadePoint:
    """Everything the rule cascade needs about one validation document."""

    score_a: float
    score_b: float
    patient: bool
    out_of_envelope: bool
    gold: Label


def default_grid_values(step: float = 0.01) -> tuple[float, ...]:
    if not 0.0 < step <= 1.0:
        raise ValueError("grid step must be in (0, 1]")
    n = int(math.floor(1.0 / step + 1e-9))
    values = [min(1.0, i * step) for i in range(n + 1)]
    if values[-1] < 1.0:
        values.append(1.0)
    return tuple(values)


@dataclass(frozen=True)
class GridSpec:
    theta_a_values: tuple[float, ...]
    theta_b_values: tuple[float, ...]
    target_recall: float

    def __post_init__(self) -> None:
        for name, values in (
            ("theta_a_values", self.theta_a_values),
            ("theta_b_values", self.theta_b_values),
        ):
            if not values or 0.0 not in values:
                raise ValueError(f"{name} must contain 0.0")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise ValueError(f"{name} must be strictly ascending")
            if values[0] < 0.0 or values[-1] > 1.0:
                raise ValueError(f"{name} must lie within [0, 1]")
        if not 0.0 < self.target_recall <= 1.0:
            raise ValueError("target_recall must be in (0, 1]")

    @staticmethod
    def with_step(step: float, target_recall: float) -> "GridSpec":
        values = default_grid_values(step)
        return GridSpec(values, values, target_recall)


@dataclass(frozen=True)
class CalibrationResult:
    thresholds: RuleThresholds
    validation_recall: float
    validation_fpr: float
    feasible: bool
    candidates_examined: int


def grid_search_thresholds(
    validation: Sequence[CascadePoint], grid: GridSpec
) -> CalibrationResult:
    """Exhaustive search over the threshold grid.

    Counts false negatives and true negatives for every (theta_a, theta_b)
    pair with one integer matrix product each, which is exact. Ties on
    (fpr, recall) resolve to the higher theta_a, then higher theta_b, so
    equal-measure solutions prefer flagging less.
    """
    pos = [p for p in validation if p.gold is Label.SUSPECT_ADVERSE]
    neg = [p for p in validation if p.gold is Label.NOT_SUSPECT]
    if not pos or not neg:
        raise CalibrationError("validation needs at least one of each label")

    ta = np.array(grid.theta_a_values)
    tb = np.array(grid.theta_b_values)

    def negative_counts(points: list[CascadePoint]) -> np.ndarray:
        """Matrix N[i, j] = how many points the cascade rejects at (i, j)."""
        free = [p for p in points if not (p.out_of_envelope or p.patient)]
        if not free:
            return np.zeros((len(ta), len(tb)), dtype=np.int64)
        sa = np.array([p.score_a for p in free])
        sb = np.array([p.score_b for p in free])
        below_a = (sa[np.newaxis, :] < ta[:, np.newaxis]).astype(np.int64)
        below_b = (sb[:, np.newaxis] < tb[np.newaxis, :]).astype(np.int64)
        return below_a @ below_b

    fn = negative_counts(pos)
    tn = negative_counts(neg)
    tp = len(pos) - fn
    fp = len(neg) - tn

    recall = tp / len(pos)
    fpr = fp / len(neg)
    feasible = recall >= grid.target_recall

    fpr_masked = np.where(feasible, fpr, np.inf)
    best_fpr = fpr_masked.min()
    if not np.isfinite(best_fpr):
        # unreachable when the grids contain 0.0: thresholds (0, 0) flag all
        raise CalibrationError("no feasible grid point for the target recall")
    tie = fpr_masked == best_fpr
    best_recall = recall[tie].max()
    tie &= recall == best_recall
    i = np.where(tie.any(axis=1))[0].max()
    j = np.where(tie[i])[0].max()

    return CalibrationResult(
        thresholds=RuleThresholds(theta_a=float(ta[i]), theta_b=float(tb[j])),
        validation_recall=float(recall[i, j]),
        validation_fpr=float(fpr[i, j]),
        feasible=True,
        candidates_examined=len(ta) * len(tb),
    )


# ---------------------------------------------------------------------------
# Repeated-resampling experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunCell:
    target_recall: float
    run: int
    theta_a: float
    theta_b: float
    validation_recall: float
    validation_fpr: float
    test_recall: float
    test_fpr: float


@dataclass(frozen=True)
class TargetAggregate:
    target_recall: float
    mean_fpr: float
    mean_recall: float
    median_recall: float
    q1_recall: float
    q3_recall: float
    min_recall: float
    max_recall: float


@dataclass(frozen=True)
class ExperimentReport:
    targets: tuple[float, ...]
    runs: int
    base_seed: int
    corpus_digest: str
    bundle_digest: str
    run_seeds: tuple[int, ...]
    cells: tuple[RunCell, ...]
    aggregates: tuple[TargetAggregate, ...]


def _aggregate(target: float, cells: list[RunCell]) -> TargetAggregate:
    recalls = np.array([c.test_recall for c in cells])
    fprs = np.array([c.test_fpr for c in cells])
    return TargetAggregate(
        target_recall=target,
        mean_fpr=float(fprs.mean()),
        mean_recall=float(recalls.mean()),
        median_recall=float(np.median(recalls)),
        q1_recall=float(np.percentile(recalls, 25)),
        q3_recall=float(np.percentile(recalls, 75)),
        min_recall=float(recalls.min()),
        max_recall=float(recalls.max()),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    train_fraction: float = 0.90
    grid_step: float = 0.01
    vocab: VocabularyConfig = VocabularyConfig()
    scorer_a: ScorerAConfig = ScorerAConfig()
    scorer_b: ScorerBConfig = ScorerBConfig()
    envelope_percentiles: tuple[float, float] = (1.0, 99.0)
    created_utc: str = "1970-01-01T00:00:00Z"


def envelope_from_docs(
    docs: list[TokenizedDoc], percentiles: tuple[float, float]
) -> EnvelopeConfig:
    """Token bounds from the training length distribution."""
    counts = np.array([d.token_count for d in docs])
    low = int(math.floor(np.percentile(counts, percentiles[0])))
    high = int(math.ceil(np.percentile(counts, percentiles[1])))
    return EnvelopeConfig(min_tokens=low, max_tokens=high)


def _cascade_confusion(
    points: Sequence[CascadePoint], thresholds: RuleThresholds
) -> tuple[int, int, int, int]:
    tp = fp = tn = fn = 0
    for p in points:
        positive = (
            p.out_of_envelope
            or p.score_a >= thresholds.theta_a
            or p.score_b >= thresholds.theta_b
            or p.patient
        )
        if p.gold is Label.SUSPECT_ADVERSE:
            tp, fn = (tp + 1, fn) if positive else (tp, fn + 1)
        else:
            fp, tn = (fp + 1, tn) if positive else (fp, tn + 1)
    return tp, fp, tn, fn


def run_repeated_experiments(
    corpus: Sequence[LabeledArticle],
    targets: Sequence[float],
    runs: int = 10,
    base_seed: int = 0,
    config: ExperimentConfig | None = None,
) -> tuple[ExperimentReport, ModelBundle]:
    """Fixed 90% training split; validation/test re-sampled each run.

    Returns the report plus the trained bundle. The bundle's thresholds are
    taken from run 0 at the highest requested target, giving the persisted
    model a concrete conservative operating point.
    """
    cfg = config or ExperimentConfig()
    if runs < 1:
        raise CalibrationError("runs must be >= 1")
    if not targets:
        raise CalibrationError("at least one target recall is required")
    targets = tuple(sorted(targets))

    spec = SplitSpec(
        train_fraction=cfg.train_fraction, seed=base_seed, stratify_by_category=True
    )
    splits = stratified_split(list(corpus), spec)
    train = splits.train
    pool = splits.validation + splits.test
    if not pool:
        raise CalibrationError("holdout pool is empty")

    train_docs = [normalize_tokenize(la.article) for la in train]
    envelope = envelope_from_docs(train_docs, cfg.envelope_percentiles)
    patterns = PatientPatternConfig()

    # vocabulary from the raw (pre-upsampling) training text
    vocabulary = build_vocabulary(train_docs, cfg.vocab)
    balanced = upsample_minority(train, seed=base_seed)
    doc_by_id = {d.article_id: d for d in train_docs}
    feats = [featurize(doc_by_id[la.article.id], vocabulary) for la in balanced]
    labels = [la.label for la in balanced]
    digest = corpus_digest([la.article for la in corpus])

    scorer_a = train_scorer_a(
        feats,
        labels,
        cfg.scorer_a,
        seed=base_seed,
        dim=len(vocabulary),
        corpus_digest=digest,
        trained_utc=cfg.created_utc,
    )
    scorer_b = train_scorer_b(
        feats,
        labels,
        cfg.scorer_b,
        seed=base_seed + 1,
        dim=len(vocabulary),
        corpus_digest=digest,
        trained_utc=cfg.created_utc,
    )

    def to_point(la: LabeledArticle) -> CascadePoint:
        doc = normalize_tokenize(la.article)
        verdict = check_envelope(doc, envelope)
        if not verdict.in_envelope:
            return CascadePoint(0.0, 0.0, False, True, la.label)
        fv = featurize(doc, vocabulary)
        return CascadePoint(
            score_a=scorer_a.score(fv),
            score_b=scorer_b.score(fv),
            patient=bool(extract_patient_mentions(doc, patterns)),
            out_of_envelope=False,
            gold=la.label,
        )

    point_by_id = {la.article.id: to_point(la) for la in pool}

    run_seeds = tuple(base_seed + r for r in range(runs))
    cells: list[RunCell] = []
    bundle_thresholds: RuleThresholds | None = None
    for r, run_seed in enumerate(run_seeds):
        val, test = split_validation_test(pool, seed=run_seed, stratify_by_category=True)
        if not val or not test:
            raise CalibrationError("degenerate validation/test split")
        val_points = [point_by_id[la.article.id] for la in val]
        test_points = [point_by_id[la.article.id] for la in test]
        for target in targets:
            grid = GridSpec.with_step(cfg.grid_step, target)
            result = grid_search_thresholds(val_points, grid)
            tp, fp, tn, fn = _cascade_confusion(test_points, result.thresholds)
            if tp + fn == 0 or fp + tn == 0:
                raise CalibrationError("degenerate validation/test split")
            cells.append(
                RunCell(
                    target_recall=target,
                    run=r,
                    theta_a=result.thresholds.theta_a,
                    theta_b=result.thresholds.theta_b,
                    validation_recall=result.validation_recall,
                    validation_fpr=result.validation_fpr,
                    test_recall=tp / (tp + fn),
                    test_fpr=fp / (fp + tn),
                )
            )
            if r == 0 and target == targets[-1]:
                bundle_thresholds = result.thresholds

    aggregates = tuple(
        _aggregate(target, [c for c in cells if c.target_recall == target])
        for target in targets
    )
    assert bundle_thresholds is not None
    bundle = ModelBundle(
        vocabulary=vocabulary,
        scorer_a=scorer_a,
        scorer_b=scorer_b,
        envelope=envelope,
        thresholds=bundle_thresholds,
        patterns=patterns,
        training_corpus_digest=digest,
        seed=base_seed,
        created_utc=cfg.created_utc,
    )
    report = ExperimentReport(
        targets=targets,
        runs=runs,
        base_seed=base_seed,
        corpus_digest=digest,
        bundle_digest=bundle.digest,
        run_seeds=run_seeds,
        cells=tuple(cells),
        aggregates=aggregates,
    )
    return report, bundle


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------


def bundle_cascade_point(la: LabeledArticle, bundle: ModelBundle) -> CascadePoint:
    """Screen one labeled article into the point form the grid search uses."""
    doc = normalize_tokenize(la.article)
    verdict = check_envelope(doc, bundle.envelope)
    if not verdict.in_envelope:
        return CascadePoint(0.0, 0.0, False, True, la.label)
    fv = featurize(doc, bundle.vocabulary)
    return CascadePoint(
        score_a=bundle.scorer_a.score(fv),
        score_b=bundle.scorer_b.score(fv),
        patient=bool(extract_patient_mentions(doc, bundle.patterns)),
        out_of_envelope=False,
        gold=la.label,
    )


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "targets": list(report.targets),
        "runs": report.runs,
        "base_seed": report.base_seed,
        "corpus_digest": report.corpus_digest,
        "bundle_digest": report.bundle_digest,
        "run_seeds": list(report.run_seeds),
        "cells": [vars(c).copy() for c in report.cells],
        "aggregates": [vars(a).copy() for a in report.aggregates],
    }


def report_from_dict(data: dict) -> ExperimentReport:
    return ExperimentReport(
        targets=tuple(data["targets"]),
        runs=int(data["runs"]),
        base_seed=int(data["base_seed"]),
        corpus_digest=data["corpus_digest"],
        bundle_digest=data["bundle_digest"],
        run_seeds=tuple(data["run_seeds"]),
        cells=tuple(RunCell(**c) for c in data["cells"]),
        aggregates=tuple(TargetAggregate(**a) for a in data["aggregates"]),
    )


def write_report_json(report: ExperimentReport, path: str | Path) -> None:
    """Full-fidelity report artifact; floats round-trip via repr."""
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_report_json(path: str | Path) -> ExperimentReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_runs_csv(report: ExperimentReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["target_recall", "run", "test_recall", "test_fpr", "theta_a", "theta_b"]
        )
        for c in report.cells:
            writer.writerow(
                [c.target_recall, c.run, c.test_recall, c.test_fpr, c.theta_a, c.theta_b]
            )


def write_aggregate_csv(report: ExperimentReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target_recall", "mean_fpr"])
        for agg in report.aggregates:
            writer.writerow([agg.target_recall, agg.mean_fpr])


def write_plot_data(report: ExperimentReport, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "recall_curve.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["target_recall", "min", "q1", "median", "q3", "max", "mean"]
        )
        for a in report.aggregates:
            writer.writerow(
                [
                    a.target_recall,
                    a.min_recall,
                    a.q1_recall,
                    a.median_recall,
                    a.q3_recall,
                    a.max_recall,
                    a.mean_recall,
                ]
            )
    with open(out / "fpr_curve.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target_recall", "mean_fpr"])
        for a in report.aggregates:
            writer.writerow([a.target_recall, a.mean_fpr])

"""Disclosure fact sheet for a trained screening bundle.

The fact sheet is the document a deploying organization hands to reviewers
and auditors. Generation is strict: every mandatory section must be present
and every performance number is copied verbatim from the experiment report,
never recomputed. Rendering is deterministic, so two runs over the same
inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from litscreen.calibrate import ExperimentReport
from litscreen.corpus import Label, LabeledArticle, corpus_digest
from litscreen.models.bundle import ModelBundle

_EMPTY_SHA256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"

_CASCADE_DESCRIPTION = (
    "Ordered rule cascade, first match wins: R1_envelope labels any "
    "out-of-envelope input suspect_adverse as a fail-safe; R2_score_a fires "
    "when score_a >= theta_a; R3_score_b fires when score_b >= theta_b; "
    "R4_patient fires on an identifiable patient mention; R5_default "
    "labels everything else not_suspect."
)


class FactsheetError(ValueError):
    """Raised when generation inputs are inconsistent or incomplete."""


@dataclass(frozen=True)
class DisclosureTexts:
    """Operator-supplied prose. The tool checks presence, not content."""

    intended_use: str
    out_of_scope_uses: str
    limitations: str


@dataclass(frozen=True)
class EnvelopeDisclosure:
    languages: tuple[str, ...]
    min_tokens: int
    max_tokens: int
    invalid_title_prefixes: tuple[str, ...]
    invalid_abstract_prefixes: tuple[str, ...]


@dataclass(frozen=True)
class ModelSummary:
    scorer_a_algorithm: str
    scorer_b_algorithm: str
    cascade: str


@dataclass(frozen=True)
class TrainingDataComposition:
    corpus_digest: str
    size: int
    positives: int
    negatives: int
    category_counts: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class PerformanceRow:
    """One evaluation target. Values are copied from the report verbatim."""

    target_recall: float
    mean_test_fpr: float
    min_recall: float
    q1_recall: float
    median_recall: float
    q3_recall: float
    max_recall: float
    mean_recall: float


@dataclass(frozen=True)
class FactSheet:
    intended_use: str
    out_of_scope_uses: str
    operating_envelope: EnvelopeDisclosure
    model_summary: ModelSummary
    training_data: TrainingDataComposition
    performance: tuple[PerformanceRow, ...]
    limitations: str
    bundle_digest: str
    created_utc: str

    def __post_init__(self) -> None:
        targets = [row.target_recall for row in self.performance]
        if targets != sorted(targets):
            raise FactsheetError("performance rows must be sorted by target recall")

    def to_dict(self) -> dict:
        return {
            "intended_use": self.intended_use,
            "out_of_scope_uses": self.out_of_scope_uses,
            "operating_envelope": {
                "languages": list(self.operating_envelope.languages),
                "min_tokens": self.operating_envelope.min_tokens,
                "max_tokens": self.operating_envelope.max_tokens,
                "invalid_title_prefixes": list(
                    self.operating_envelope.invalid_title_prefixes
                ),
                "invalid_abstract_prefixes": list(
                    self.operating_envelope.invalid_abstract_prefixes
                ),
            },
            "model_summary": {
                "scorer_a_algorithm": self.model_summary.scorer_a_algorithm,
                "scorer_b_algorithm": self.model_summary.scorer_b_algorithm,
                "cascade": self.model_summary.cascade,
            },
            "training_data": {
                "corpus_digest": self.training_data.corpus_digest,
                "size": self.training_data.size,
                "positives": self.training_data.positives,
                "negatives": self.training_data.negatives,
                "category_counts": {
                    name: count
                    for name, count in self.training_data.category_counts
                },
            },
            "performance": [vars(row).copy() for row in self.performance],
            "limitations": self.limitations,
            "version": {
                "bundle_digest": self.bundle_digest,
                "created_utc": self.created_utc,
            },
        }


def composition_from_corpus(
    corpus: Sequence[LabeledArticle],
) -> TrainingDataComposition:
    positives = sum(1 for item in corpus if item.label is Label.SUSPECT_ADVERSE)
    categories: dict[str, int] = {}
    for item in corpus:
        cat = item.article.source or "unspecified"
        categories[cat] = categories.get(cat, 0) + 1
    return TrainingDataComposition(
        corpus_digest=corpus_digest([item.article for item in corpus]),
        size=len(corpus),
        positives=positives,
        negatives=len(corpus) - positives,
        category_counts=tuple(sorted(categories.items())),
    )


def _require_text(name: str, value: str) -> str:
    if not value or not value.strip():
        raise FactsheetError(f"missing mandatory section: {name}")
    return value.strip()


def generate_factsheet(
    bundle: ModelBundle,
    report: ExperimentReport,
    texts: DisclosureTexts,
    corpus: Sequence[LabeledArticle] | None = None,
) -> FactSheet:
    """Assemble the fact sheet, refusing on any provenance mismatch.

    The report must describe exactly this bundle and, when the training
    corpus is supplied, its digest must match what the bundle was trained
    on. Composition statistics come from the corpus; without it the sheet
    carries the digest and leaves counts at zero.
    """

    if report.bundle_digest != bundle.digest:
        raise FactsheetError(
            "report bundle digest does not match bundle: "
            f"{report.bundle_digest} vs {bundle.digest}"
        )
    if report.corpus_digest != bundle.training_corpus_digest:
        raise FactsheetError(
            "report corpus digest does not match bundle training corpus: "
            f"{report.corpus_digest} vs {bundle.training_corpus_digest}"
        )
    if corpus is not None:
        composition = composition_from_corpus(corpus)
        if composition.corpus_digest != bundle.training_corpus_digest:
            raise FactsheetError(
                "supplied corpus digest does not match bundle training corpus: "
                f"{composition.corpus_digest} vs {bundle.training_corpus_digest}"
            )
    else:
        composition = TrainingDataComposition(
            corpus_digest=bundle.training_corpus_digest,
            size=0,
            positives=0,
            negatives=0,
            category_counts=(),
        )

    if not report.aggregates:
        raise FactsheetError("missing mandatory section: performance")

    env = bundle.envelope
    rows = tuple(
        PerformanceRow(
            target_recall=agg.target_recall,
            mean_test_fpr=agg.mean_fpr,
            min_recall=agg.min_recall,
            q1_recall=agg.q1_recall,
            median_recall=agg.median_recall,
            q3_recall=agg.q3_recall,
            max_recall=agg.max_recall,
            mean_recall=agg.mean_recall,
        )
        for agg in report.aggregates
    )
    return FactSheet(
        intended_use=_require_text("intended_use", texts.intended_use),
        out_of_scope_uses=_require_text(
            "out_of_scope_uses", texts.out_of_scope_uses
        ),
        operating_envelope=EnvelopeDisclosure(
            languages=env.allowed_languages,
            min_tokens=env.min_tokens,
            max_tokens=env.max_tokens,
            invalid_title_prefixes=env.errata_title_prefixes,
            invalid_abstract_prefixes=env.errata_abstract_prefixes,
        ),
        model_summary=ModelSummary(
            scorer_a_algorithm=bundle.scorer_a.algorithm,
            scorer_b_algorithm=bundle.scorer_b.algorithm,
            cascade=_CASCADE_DESCRIPTION,
        ),
        training_data=composition,
        performance=rows,
        limitations=_require_text("limitations", texts.limitations),
        bundle_digest=bundle.digest,
        created_utc=bundle.created_utc,
    )


def render_json(sheet: FactSheet) -> str:
    return json.dumps(sheet.to_dict(), indent=2, sort_keys=True) + "\n"


def _fmt(value: float) -> str:
    # repr round-trips, so numbers in the rendering equal the report's.
    return repr(float(value))


def render_markdown(sheet: FactSheet) -> str:
    env = sheet.operating_envelope
    td = sheet.training_data
    lines: list[str] = []
    lines.append("# Screening Model Fact Sheet")
    lines.append("")
    lines.append("## Intended use")
    lines.append("")
    lines.append(sheet.intended_use)
    lines.append("")
    lines.append("## Out-of-scope uses")
    lines.append("")
    lines.append(sheet.out_of_scope_uses)
    lines.append("")
    lines.append("## Operating envelope")
    lines.append("")
    lines.append(f"- Languages: {', '.join(env.languages)}")
    lines.append(f"- Token bounds: {env.min_tokens} to {env.max_tokens} tokens")
    lines.append(
        "- Rejected formats: titles starting with "
        + ", ".join(repr(p) for p in env.invalid_title_prefixes)
        + "; abstracts starting with "
        + ", ".join(repr(p) for p in env.invalid_abstract_prefixes)
    )
    lines.append("")
    lines.append("## Model summary")
    lines.append("")
    lines.append(f"- Scorer slot A: {sheet.model_summary.scorer_a_algorithm}")
    lines.append(f"- Scorer slot B: {sheet.model_summary.scorer_b_algorithm}")
    lines.append(f"- Decision rule: {sheet.model_summary.cascade}")
    lines.append("")
    lines.append("## Training data")
    lines.append("")
    lines.append(f"- Corpus digest: `{td.corpus_digest}`")
    lines.append(f"- Size: {td.size}")
    lines.append(f"- Label balance: {td.positives} positive, {td.negatives} negative")
    if td.category_counts:
        lines.append("- Selection categories:")
        for name, count in td.category_counts:
            lines.append(f"  - {name}: {count}")
    lines.append("")
    lines.append("## Performance")
    lines.append("")
    lines.append(
        "| target recall | mean test FPR | min | q1 | median | q3 | max | mean |"
    )
    lines.append("| --- | --- | --- | --- | --- | --- | --- | --- |")
    for row in sheet.performance:
        lines.append(
            "| "
            + " | ".join(
                _fmt(v)
                for v in (
                    row.target_recall,
                    row.mean_test_fpr,
                    row.min_recall,
                    row.q1_recall,
                    row.median_recall,
                    row.q3_recall,
                    row.max_recall,
                    row.mean_recall,
                )
            )
            + " |"
        )
    lines.append("")
    lines.append(
        "Recall columns summarize per-run test recall across repeated splits."
    )
    lines.append("")
    lines.append("## Limitations")
    lines.append("")
    lines.append(sheet.limitations)
    lines.append("")
    lines.append("## Version")
    lines.append("")
    lines.append(f"- Bundle digest: `{sheet.bundle_digest}`")
    lines.append(f"- Created: {sheet.created_utc}")
    lines.append("")
    return "\n".join(lines)


def write_factsheet(sheet: FactSheet, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "factsheet.json"
    md_path = out / "FACTSHEET.md"
    json_path.write_text(render_json(sheet), encoding="utf-8")
    md_path.write_text(render_markdown(sheet), encoding="utf-8")
    return json_path, md_path


@dataclass(frozen=True)
class DigestManifest:
    """Per-file SHA-256 digests plus one digest over the sorted pairs."""

    files: tuple[tuple[str, str], ...]
    combined: str

    def to_dict(self) -> dict:
        return {
            "files": {name: digest for name, digest in self.files},
            "combined": self.combined,
        }


def compute_digests(paths: Iterable[str | Path]) -> DigestManifest:
    """Digest release artifacts. An empty file hashes to the SHA-256 of
    zero bytes, so accidental truncation is visible in the manifest."""

    entries: dict[str, str] = {}
    for raw in paths:
        path = Path(raw)
        data = path.read_bytes()
        digest = hashlib.sha256(data).hexdigest()
        if not data:
            assert digest == _EMPTY_SHA256
        if path.name in entries and entries[path.name] != digest:
            raise FactsheetError(f"duplicate artifact name: {path.name}")
        entries[path.name] = digest
    ordered = tuple(sorted(entries.items()))
    combined = hashlib.sha256(
        "\n".join(f"{name}:{digest}" for name, digest in ordered).encode("utf-8")
    ).hexdigest()
    return DigestManifest(files=ordered, combined=combined)

"""Corpus handling: ingest, validate, deduplicate, label, split, synthesize.

Articles are title/abstract records only; the screening engine consumes no
other metadata. JSONL is the canonical on-disk format (one object per line,
keys id/title/abstract plus optional source/label/annotator).
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from pathlib import Path
from typing import Iterable, Sequence


class Label(Enum):
    SUSPECT_ADVERSE = "suspect_adverse"
    NOT_SUSPECT = "not_suspect"


class CorpusError(ValueError):
    """Invalid corpus content (bad record, duplicate id, degenerate split)."""


class DuplicateIdError(CorpusError):
    pass


@dataclass(frozen=True)
class Article:
    """One screening unit: identifier plus raw title and abstract text."""

    id: str
    title: str
    abstract: str
    source: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("article id must be non-empty")
        if not self.title and not self.abstract:
            raise CorpusError(f"article {self.id!r}: title and abstract both empty")


@dataclass(frozen=True)
class SecondReview:
    label: Label
    annotator: str


@dataclass(frozen=True)
class LabeledArticle:
    article: Article
    label: Label
    annotator: str = "unspecified"
    second_review: SecondReview | None = None

    def __post_init__(self) -> None:
        if self.second_review is not None and self.second_review.annotator == self.annotator:
            raise CorpusError(
                f"article {self.article.id!r}: second review annotator must differ"
            )


@dataclass(frozen=True)
class RejectedRecord:
    line_no: int
    reason: str


@dataclass
class IngestResult:
    articles: list[Article]
    labeled: list[LabeledArticle]
    rejects: list[RejectedRecord]


@dataclass(frozen=True)
class SplitSpec:
    """90/5/5-style split: train_fraction for training, remainder halved.

    Validation takes the floor of the remainder half, test the rest, so the
    two differ by at most one item. Stratification is by label, optionally
    refined by the article's selection-category tag (the ``source`` field).
    """

    train_fraction: float = 0.90
    seed: int = 0
    stratify_by_category: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise CorpusError("train_fraction must be in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise CorpusError("seed must be a 64-bit unsigned integer")


@dataclass
class CorpusSplits:
    train: list[LabeledArticle]
    validation: list[LabeledArticle]
    test: list[LabeledArticle]


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

_LABEL_VALUES = {lab.value: lab for lab in Label}


def _record_to_article(rec: dict, line_no: int) -> tuple[Article, Label | None, str]:
    rec_id = str(rec.get("id", "") or "")
    if not rec_id:
        raise CorpusError("missing id")
    title = str(rec.get("title", "") or "")
    abstract = str(rec.get("abstract", "") or "")
    if not title and not abstract:
        raise CorpusError("title and abstract both empty")
    source = rec.get("source")
    article = Article(rec_id, title, abstract, str(source) if source else None)
    label = None
    raw_label = rec.get("label")
    if raw_label is not None and raw_label != "":
        if raw_label not in _LABEL_VALUES:
            raise CorpusError(f"unknown label {raw_label!r}")
        label = _LABEL_VALUES[raw_label]
    annotator = str(rec.get("annotator", "") or "unspecified")
    return article, label, annotator


def ingest_articles(path: str | Path, format: str = "jsonl") -> IngestResult:
    """Parse a JSONL or CSV corpus file.

    Returns articles in file order. Records failing validation are reported
    as rejects with their line number; a duplicate id anywhere in the file
    is fatal.
    """
    path = Path(path)
    if format not in ("jsonl", "csv"):
        raise CorpusError(f"unsupported format {format!r}")
    if not path.exists():
        raise FileNotFoundError(path)

    articles: list[Article] = []
    labeled: list[LabeledArticle] = []
    rejects: list[RejectedRecord] = []
    seen_ids: dict[str, int] = {}

    def consume(rec: dict, line_no: int) -> None:
        try:
            article, label, annotator = _record_to_article(rec, line_no)
        except CorpusError as exc:
            rejects.append(RejectedRecord(line_no, str(exc)))
            return
        if article.id in seen_ids:
            raise DuplicateIdError(
                f"duplicate id {article.id!r} at line {line_no} "
                f"(first seen at line {seen_ids[article.id]})"
            )
        seen_ids[article.id] = line_no
        articles.append(article)
        if label is not None:
            labeled.append(LabeledArticle(article, label, annotator))

    if format == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    rejects.append(RejectedRecord(line_no, f"invalid JSON: {exc.msg}"))
                    continue
                if not isinstance(rec, dict):
                    rejects.append(RejectedRecord(line_no, "record is not an object"))
                    continue
                consume(rec, line_no)
    else:
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "id" not in reader.fieldnames:
                raise CorpusError("CSV must carry header-named columns (id,title,abstract)")
            for line_no, row in enumerate(reader, start=2):
                consume({k: v for k, v in row.items() if v is not None}, line_no)

    return IngestResult(articles, labeled, rejects)


def write_corpus_jsonl(items: Sequence[Article | LabeledArticle], path: str | Path) -> None:
    """Write articles (labeled or not) to canonical JSONL, LF line endings."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for item in items:
            if isinstance(item, LabeledArticle):
                art, label, annotator = item.article, item.label, item.annotator
            else:
                art, label, annotator = item, None, None
            rec: dict = {"id": art.id, "title": art.title, "abstract": art.abstract}
            if art.source:
                rec["source"] = art.source
            if label is not None:
                rec["label"] = label.value
                rec["annotator"] = annotator
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def corpus_digest(items: Sequence[Article | LabeledArticle]) -> str:
    """SHA-256 over the canonical JSONL serialization of the corpus."""
    h = hashlib.sha256()
    for item in items:
        if isinstance(item, LabeledArticle):
            art, label = item.article, item.label.value
        else:
            art, label = item, None
        rec = {
            "id": art.id,
            "title": art.title,
            "abstract": art.abstract,
            "source": art.source,
            "label": label,
        }
        h.update(json.dumps(rec, ensure_ascii=False, sort_keys=True).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Deduplication
# ---------------------------------------------------------------------------

_WS = re.compile(r"\s+")


def _dedup_key(article: Article) -> str:
    return _WS.sub(" ", (article.title + "\n" + article.abstract).lower()).strip()


def deduplicate(
    articles: Sequence[Article],
) -> tuple[list[Article], list[tuple[str, str]]]:
    """Drop normalized exact duplicates; first occurrence wins.

    Two articles are duplicates iff their lowercased, whitespace-collapsed
    title+abstract concatenations are equal.
    """
    kept: list[Article] = []
    dropped: list[tuple[str, str]] = []
    first_by_key: dict[str, str] = {}
    for article in articles:
        key = _dedup_key(article)
        if key in first_by_key:
            dropped.append((article.id, first_by_key[key]))
        else:
            first_by_key[key] = article.id
            kept.append(article)
    return kept, dropped


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------


def _largest_remainder(quotas: list[float], total: int, caps: list[int]) -> list[int]:
    """Integer apportionment of `total` following fractional quotas.

    Base allocation is floor(quota); leftovers go to the largest fractional
    parts (ties by position, which callers keep deterministic by sorting),
    respecting per-position caps.
    """
    base = [min(int(q), cap) for q, cap in zip(quotas, caps)]
    leftover = total - sum(base)
    if leftover < 0:  # quotas overshot caps; trim deterministically
        order = sorted(range(len(base)), key=lambda i: (-base[i], i))
        for i in order:
            if leftover == 0:
                break
            take = min(base[i], -leftover)
            base[i] -= take
            leftover += take
    order = sorted(
        range(len(quotas)),
        key=lambda i: (-(quotas[i] - int(quotas[i])), i),
    )
    for i in order:
        if leftover == 0:
            break
        if base[i] < caps[i]:
            base[i] += 1
            leftover -= 1
    if leftover != 0:
        # caps too tight for the requested total; distribute anywhere legal
        for i in range(len(base)):
            while leftover > 0 and base[i] < caps[i]:
                base[i] += 1
                leftover -= 1
    return base


def _allocate_splits(
    per_category: dict[str, int], train_fraction: float
) -> dict[str, tuple[int, int, int]]:
    """Per-category (train, validation, test) counts for one label stratum.

    The label-level train count is round(fraction * n); validation gets the
    floor of the remainder half, test the rest. Category counts then follow
    by largest-remainder apportionment so label-level totals hold exactly.
    """
    cats = sorted(per_category)
    sizes = [per_category[c] for c in cats]
    n = sum(sizes)
    n_train = int(train_fraction * n + 0.5)
    remainder = n - n_train
    n_val = remainder // 2

    train_counts = _largest_remainder(
        [train_fraction * s for s in sizes], n_train, sizes
    )
    rem_sizes = [s - t for s, t in zip(sizes, train_counts)]
    val_counts = _largest_remainder(
        [r / 2 for r in rem_sizes], n_val, rem_sizes
    )
    out: dict[str, tuple[int, int, int]] = {}
    for cat, size, tr, va in zip(cats, sizes, train_counts, val_counts):
        out[cat] = (tr, va, size - tr - va)
    return out


def _strata(
    corpus: Sequence[LabeledArticle], by_category: bool
) -> dict[Label, dict[str, list[LabeledArticle]]]:
    grouped: dict[Label, dict[str, list[LabeledArticle]]] = {}
    for item in corpus:
        cat = (item.article.source or "") if by_category else ""
        grouped.setdefault(item.label, {}).setdefault(cat, []).append(item)
    return grouped


def _stratum_shuffled(
    items: list[LabeledArticle], seed: int, label: Label, cat: str
) -> list[LabeledArticle]:
    ordered = sorted(items, key=lambda it: it.article.id)
    random.Random(f"{seed}|{label.value}|{cat}").shuffle(ordered)
    return ordered


def stratified_split(corpus: Sequence[LabeledArticle], spec: SplitSpec) -> CorpusSplits:
    """Deterministic stratified train/validation/test split."""
    ids = [it.article.id for it in corpus]
    if len(set(ids)) != len(ids):
        raise DuplicateIdError("corpus contains duplicate article ids")
    grouped = _strata(corpus, spec.stratify_by_category)
    if len(grouped) < len(Label):
        raise CorpusError("corpus must contain at least one article of each label")

    train: list[LabeledArticle] = []
    validation: list[LabeledArticle] = []
    test: list[LabeledArticle] = []
    for label in sorted(grouped, key=lambda lab: lab.value):
        cats = grouped[label]
        alloc = _allocate_splits({c: len(v) for c, v in cats.items()}, spec.train_fraction)
        for cat in sorted(cats):
            items = _stratum_shuffled(cats[cat], spec.seed, label, cat)
            n_tr, n_va, n_te = alloc[cat]
            train.extend(items[:n_tr])
            validation.extend(items[n_tr : n_tr + n_va])
            test.extend(items[n_tr + n_va :])

    if not train or not validation or not test:
        raise CorpusError(
            "corpus too small to place at least one item per split "
            f"(got train={len(train)}, validation={len(validation)}, test={len(test)})"
        )
    return CorpusSplits(train, validation, test)


def split_validation_test(
    pool: Sequence[LabeledArticle], seed: int, stratify_by_category: bool = False
) -> tuple[list[LabeledArticle], list[LabeledArticle]]:
    """Split a held-out pool evenly into (validation, test), stratified.

    Validation takes the floor of each label-level half, mirroring the
    remainder policy of :func:`stratified_split`.
    """
    grouped = _strata(pool, stratify_by_category)
    validation: list[LabeledArticle] = []
    test: list[LabeledArticle] = []
    for label in sorted(grouped, key=lambda lab: lab.value):
        cats = grouped[label]
        sizes = {c: len(v) for c, v in cats.items()}
        n = sum(sizes.values())
        names = sorted(sizes)
        val_counts = _largest_remainder(
            [sizes[c] / 2 for c in names], n // 2, [sizes[c] for c in names]
        )
        for cat, n_val in zip(names, val_counts):
            items = _stratum_shuffled(cats[cat], seed, label, cat)
            validation.extend(items[:n_val])
            test.extend(items[n_val:])
    if not validation or not test:
        raise CorpusError("pool too small to split into validation and test")
    return validation, test


def upsample_minority(
    train: Sequence[LabeledArticle], seed: int
) -> list[LabeledArticle]:
    """Balance label counts by re-sampling the minority label with replacement.

    All original items are retained; sampled duplicates are appended.
    """
    by_label: dict[Label, list[LabeledArticle]] = {}
    for item in train:
        by_label.setdefault(item.label, []).append(item)
    if len(by_label) < 2:
        raise CorpusError("upsampling requires both labels present")
    counts = {lab: len(items) for lab, items in by_label.items()}
    minority = min(counts, key=lambda lab: (counts[lab], lab.value))
    majority = max(counts, key=lambda lab: (counts[lab], lab.value))
    need = counts[majority] - counts[minority]
    out = list(train)
    if need > 0:
        rng = random.Random(seed)
        out.extend(rng.choices(by_label[minority], k=need))
    return out


# ---------------------------------------------------------------------------
# Synthetic corpus generation
# ---------------------------------------------------------------------------

# Every generated document is padded to exactly this many tokens (by the
# screening tokenizer's definition of a token). Constant length pins any
# train-derived token bounds to a single value, so the generator can never
# emit a document that falls outside an envelope fitted on its own output.
_DOC_TOKENS = 80

_SYNTH_TOKEN_RE = re.compile(r"\w+(?:-\w+)*")  # mirrors the screening tokenizer

_DRUGS = [
    "tavolumab", "zeprinole", "cortivast", "melandrine", "oxafenib",
    "lurasolol", "pexiravir", "dolcetrin", "varnoclast", "intrafexin",
]
_EVENTS = [
    "hypercalcemia", "peripheral neuropathy", "hepatotoxicity", "severe rash",
    "acute pancreatitis", "thrombocytopenia", "renal impairment",
    "interstitial pneumonitis", "anaphylaxis",
]
_MINOR_EVENTS = ["nausea", "fatigue", "pruritus", "insomnia", "constipation"]
_CONDITIONS = [
    "rheumatoid arthritis", "type 2 diabetes", "metastatic melanoma",
    "chronic heart failure", "ulcerative colitis", "major depressive disorder",
    "non-small cell lung cancer", "atrial fibrillation",
]
_ENZYMES = ["CYP3A4", "CYP2D6", "UGT1A1", "CYP2C9"]
_SEXES = ["woman", "man", "male patient", "female patient"]
_SPELLED_COUNTS = [
    "Eleven", "Fourteen", "Seventeen", "Nineteen",
    "Twenty-two", "Twenty-six", "Thirty-one", "Thirty-eight",
]

# Neutral titles (9 tokens each) and fillers (10 tokens each) shared across
# families; the graded families below are built from these pools only.
_NEUTRAL_TITLES = [
    "A multicenter observational study of treatment outcomes in adults",
    "Retrospective analysis of long-term therapy in routine clinical practice",
    "Real-world evidence from a national registry of treated adults",
    "Twelve-month follow-up experience drawn from a prospective outpatient cohort",
    "Patterns of medication use and persistence in community settings",
    "An interim report from an ongoing post-marketing surveillance programme",
    "Clinical experience with standard dosing in a tertiary centre",
    "Observations on treatment continuation from a regional practice network",
]
_FILLERS = [
    "Data were collected from twelve centres over three consecutive years.",
    "Baseline characteristics were broadly similar across all participating study groups.",
    "The protocol was approved by the relevant institutional ethics committees.",
    "Further studies are warranted to confirm and extend these observations.",
    "Scheduled visits included routine laboratory testing and structured symptom review.",
    "Adherence was assessed using pharmacy refill records and structured interviews.",
    "Statistical summaries were prepared for the full analysis population only.",
    "Missing values were handled according to a prespecified analysis plan.",
    "Recruitment proceeded steadily across both urban and rural practice sites.",
    "Investigators documented concomitant medication use at every scheduled assessment visit.",
    "Outcome definitions followed previously established consensus criteria throughout the study.",
    "Funding sources had no role in the interpretation of results.",
]
# One closing sentence per remaining token count 2..11 tops a document up to
# _DOC_TOKENS exactly after whole fillers have been added.
_SPACERS = {
    2: "Enrolment continues.",
    3: "Follow-up is ongoing.",
    4: "Longer follow-up is ongoing.",
    5: "Additional confirmatory analyses are planned.",
    6: "A full report is in preparation.",
    7: "Detailed subgroup results will be reported separately.",
    8: "The complete dataset will be made available later.",
    9: "Extended observation of this cohort is planned to continue.",
    10: "A subsequent analysis will examine these questions in greater depth.",
    11: "The investigators intend to publish a comprehensive account of the programme.",
}

# Implicit-signal sentences, one per grade, 16 tokens each, strongest first.
# Grade k positives and their matched negatives carry the same sentence; the
# surrounding text is neutral, so the sentence alone cannot decide the label.
_SIGNAL_SENTENCES = [
    "Persistent vomiting prompted an unplanned reduction of the assigned "
    "maintenance dose in several of the participants.",
    "Treatment was temporarily interrupted after episodes of pronounced "
    "dizziness, although the investigators considered the relationship unclear.",
    "Although dose reduction was required in a fifth of patients, therapy "
    "was generally completed as planned.",
    "A few withdrawals attributed to gastrointestinal intolerance were "
    "recorded, though their connection to dosing remained uncertain.",
    "Transient elevations of liver enzymes were noted and resolved "
    "spontaneously without any change in clinical management.",
    "Occasional mild headaches were mentioned by a handful of participants, "
    "a finding of doubtful clinical significance.",
]


def _count_tokens(title: str, sentences: list[str]) -> int:
    return len(_SYNTH_TOKEN_RE.findall(" ".join([title] + sentences)))


def _padding(title: str, body: list[str], rng: random.Random) -> tuple[list[str], str]:
    """Fillers plus one spacer bringing the document to _DOC_TOKENS exactly."""
    needed = _DOC_TOKENS - _count_tokens(title, body)
    if not 2 <= needed <= len(_FILLERS) * 10 + 11:
        raise CorpusError(f"template too long or too short to pad ({needed=})")
    spacer_len = (needed - 2) % 10 + 2
    fillers = rng.sample(_FILLERS, (needed - spacer_len) // 10)
    return fillers, _SPACERS[spacer_len]


def _assemble(title: str, body: list[str], rng: random.Random) -> tuple[str, str]:
    fillers, spacer = _padding(title, body, rng)
    return title, " ".join(body + fillers + [spacer])


def _direct_doc(rng: random.Random) -> tuple[str, str]:
    """Identifiable-patient case report; always carries a patient mention."""
    drug = rng.choice(_DRUGS)
    event = rng.choice(_EVENTS)
    condition = rng.choice(_CONDITIONS)
    age = rng.randint(19, 84)
    sex = rng.choice(_SEXES)
    title = rng.choice(
        [
            f"{event.capitalize()} associated with {drug} therapy: a case report",
            f"{event.capitalize()} during {drug} treatment for {condition}",
            f"A case of {event} attributed to {drug}",
        ]
    )
    lead = rng.choice(
        [
            f"A {age}-year-old {sex} developed {event} after "
            f"{rng.randint(2, 20)} weeks of treatment with {drug} for {condition}.",
            f"We report the case of a {age}-year-old {sex} who presented with "
            f"{event} while receiving {drug} for {condition}.",
        ]
    )
    detail = rng.choice(
        [
            f"Symptoms emerged gradually and resolved within "
            f"{rng.randint(3, 30)} days of stopping {drug}.",
            f"The event recurred on rechallenge and subsided after permanent "
            f"discontinuation of {drug}.",
        ]
    )
    outcome = rng.choice(
        [
            "Causality was assessed as probable by the treating clinicians.",
            "The patient recovered fully under supportive care.",
            "No alternative explanation was identified despite a thorough workup.",
        ]
    )
    return _assemble(title, [lead, detail, outcome], rng)


def _group_doc(rng: random.Random) -> tuple[str, str]:
    """Cohort-level event series; explicit events, no identifiable patient."""
    drug = rng.choice(_DRUGS)
    event = rng.choice(_EVENTS)
    minor = rng.choice(_MINOR_EVENTS)
    condition = rng.choice(_CONDITIONS)
    title = rng.choice(
        [
            f"Safety and tolerability of {drug} in {condition}: a cohort study",
            f"Treatment-emergent events with {drug} in adults with {condition}",
        ]
    )
    lead = (
        f"{rng.choice(_SPELLED_COUNTS)} patients experienced {event} during "
        f"{drug} therapy, and several discontinued because of severe {minor}."
    )
    detail = (
        f"Most events appeared within the first {rng.randint(2, 16)} weeks of "
        "exposure and were managed with temporary interruption."
    )
    outcome = "No fatal outcomes were recorded in this cohort."
    return _assemble(title, [lead, detail, outcome], rng)


def _assoc_doc(rng: random.Random) -> tuple[str, str]:
    """Population-level association finding; suspect but not patient-level."""
    drug = rng.choice(_DRUGS)
    event = rng.choice(_EVENTS)
    condition = rng.choice(_CONDITIONS)
    title = f"Association between {drug} exposure and {event} in {condition}"
    lead = (
        f"Exposure to {drug} was associated with an increased incidence of "
        f"{event} compared with unexposed controls."
    )
    detail = (
        "The association persisted after adjustment for age, sex, and "
        "baseline disease severity."
    )
    return _assemble(title, [lead, detail], rng)


def _pk_doc(rng: random.Random) -> tuple[str, str]:
    drug = rng.choice(_DRUGS)
    title = rng.choice(
        [
            f"Pharmacokinetics of {drug} in healthy adult volunteers",
            f"Population pharmacokinetic modelling of {drug} exposure",
        ]
    )
    lead = (
        f"The pharmacokinetic profile of {drug} was characterized in "
        f"{rng.randint(12, 48)} healthy volunteers after single and repeated "
        "oral dosing."
    )
    detail = (
        f"Mean elimination half-life was {rng.randint(4, 30)} hours, and "
        "exposure increased dose-proportionally across the studied range."
    )
    extra = (
        f"Renal clearance accounted for roughly {rng.randint(10, 60)} percent "
        "of total elimination."
    )
    return _assemble(title, [lead, detail, extra], rng)


def _invitro_doc(rng: random.Random) -> tuple[str, str]:
    drug = rng.choice(_DRUGS)
    enzyme = rng.choice(_ENZYMES)
    title = f"In vitro interaction profile of {drug} with human {enzyme}"
    lead = (
        f"Inhibition of {enzyme} by {drug} was evaluated in pooled human "
        "hepatic microsomes and transfected cell lines."
    )
    detail = (
        f"The half-maximal inhibitory concentration exceeded {rng.randint(2, 90)} "
        "micromolar, suggesting low interaction potential at therapeutic "
        "concentrations."
    )
    return _assemble(title, [lead, detail], rng)


def _efficacy_doc(rng: random.Random) -> tuple[str, str]:
    drug = rng.choice(_DRUGS)
    condition = rng.choice(_CONDITIONS)
    title = rng.choice(
        [
            f"Efficacy of {drug} versus placebo in {condition}",
            f"Randomized controlled evaluation of {drug} for {condition}",
        ]
    )
    lead = (
        f"Response rates at week twelve were {rng.randint(45, 80)} percent with "
        f"{drug} and {rng.randint(15, 44)} percent with placebo among adults "
        f"with {condition}."
    )
    detail = (
        "The primary endpoint was met with a statistically significant "
        "improvement in validated symptom scores."
    )
    outcome = "Quality-of-life measures improved in parallel with the primary outcome."
    return _assemble(title, [lead, detail, outcome], rng)


def _graded_doc(grade: int, rng: random.Random) -> tuple[str, str]:
    """Neutral text around one implicit-signal sentence; used by both labels."""
    title = rng.choice(_NEUTRAL_TITLES)
    signal = _SIGNAL_SENTENCES[grade - 1]
    fillers, spacer = _padding(title, [signal], rng)
    slot = rng.randrange(len(fillers) + 1)
    body = fillers[:slot] + [signal] + fillers[slot:]
    return title, " ".join(body + [spacer])


_BUILDERS = {
    "pos_direct": _direct_doc,
    "pos_group": _group_doc,
    "pos_assoc": _assoc_doc,
    "neg_pk": _pk_doc,
    "neg_invitro": _invitro_doc,
    "neg_efficacy": _efficacy_doc,
}
for _g in range(1, len(_SIGNAL_SENTENCES) + 1):
    _BUILDERS[f"pos_signal_g{_g}"] = partial(_graded_doc, _g)
    _BUILDERS[f"neg_signal_g{_g}"] = partial(_graded_doc, _g)

# Family quotas are integer parts of each label's total. At the bundled
# evaluation shape (n=5000, positive rate 0.3) one part is 20 documents, so
# every family count stays even through the 90/5/5 split and the later
# validation/test halving, and each graded family contributes exactly one
# validation positive: reachable recall plateaus start at 69/75 and climb in
# 1/75 steps as grades are admitted.
#
# A grade-k negative family is built identically to its positive twin but is
# m_k parts large. After minority upsampling a grade's class posterior sits
# near 42/(42+18*m_k); the ladder m = (1,2,3,5,8,13) spaces those posteriors
# (0.70, 0.54, 0.44, 0.32, 0.23, 0.15) comfortably apart so calibrated
# thresholds fall between grades rather than inside one.
_POSITIVE_PARTS: list[tuple[str, int]] = [
    ("pos_direct", 43),
    ("pos_group", 15),
    ("pos_assoc", 11),
    ("pos_signal_g1", 1),
    ("pos_signal_g2", 1),
    ("pos_signal_g3", 1),
    ("pos_signal_g4", 1),
    ("pos_signal_g5", 1),
    ("pos_signal_g6", 1),
]
_NEGATIVE_PARTS: list[tuple[str, int]] = [
    ("neg_pk", 53),
    ("neg_invitro", 42),
    ("neg_efficacy", 48),
    ("neg_signal_g1", 1),
    ("neg_signal_g2", 2),
    ("neg_signal_g3", 3),
    ("neg_signal_g4", 5),
    ("neg_signal_g5", 8),
    ("neg_signal_g6", 13),
]


def _family_counts(parts: list[tuple[str, int]], total: int) -> list[tuple[str, int]]:
    weight = sum(p for _, p in parts)
    quotas = [total * p / weight for _, p in parts]
    counts = _largest_remainder(quotas, total, [total] * len(parts))
    return [(name, c) for (name, _), c in zip(parts, counts)]


def generate_synthetic_corpus(
    size: int, positive_rate: float, seed: int
) -> list[LabeledArticle]:
    """Template-generated pseudo-abstract corpus with known labels.

    Positive families cover the usual reporting registers: identifiable
    single-patient cases, cohort-level event series, population association
    findings, and six graded families whose only adverse content is one
    implicit sentence (dose reduction, interruption, tolerability wording).
    Negative families cover pharmacokinetics, in-vitro interaction, and
    efficacy-only abstracts, plus matched graded families that reuse the
    implicit sentences inside otherwise neutral text, so the hard region of
    the score axis is populated on both sides of the label boundary.

    Each article's ``source`` records its template family as a
    selection-category tag for stratified splitting. All documents are padded
    with neutral sentences to a fixed token count. Deterministic given seed.
    """
    if size < 10:
        raise CorpusError("size must be >= 10")
    if not 0.0 < positive_rate < 1.0:
        raise CorpusError("positive_rate must be in (0, 1)")
    n_pos = int(size * positive_rate + 0.5)
    n_pos = max(1, min(size - 1, n_pos))

    rng = random.Random(seed)
    plan: list[tuple[str, bool]] = []
    for family, count in _family_counts(_POSITIVE_PARTS, n_pos):
        plan.extend((family, True) for _ in range(count))
    for family, count in _family_counts(_NEGATIVE_PARTS, size - n_pos):
        plan.extend((family, False) for _ in range(count))
    rng.shuffle(plan)

    corpus: list[LabeledArticle] = []
    for idx, (family, is_pos) in enumerate(plan, start=1):
        title, abstract = _BUILDERS[family](rng)
        article = Article(
            id=f"SYN-{idx:06d}",
            title=title,
            abstract=abstract,
            source=f"synth/{family}",
        )
        corpus.append(
            LabeledArticle(
                article,
                Label.SUSPECT_ADVERSE if is_pos else Label.NOT_SUSPECT,
                annotator="generator",
            )
        )
    return corpus

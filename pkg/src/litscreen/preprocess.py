"""Input normalization: tokens, sentences, language, patient mentions, envelope.

All operations are pure and deterministic. Spans are character offsets into
the concatenated ``title + "\\n" + abstract`` text so callers can slice the
original input exactly (mention surfaces, sentence highlighting).
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum

from litscreen.corpus import Article


class LanguageError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    text: str  # lowercased surface
    start: int
    end: int


@dataclass(frozen=True)
class SentenceSpan:
    start: int
    end: int
    index: int

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError("sentence span must be non-empty")


class MentionKind(Enum):
    AGE_SEX_INDIVIDUAL = "age_sex_individual"
    EXPLICIT_CASE_REPORT = "explicit_case_report"


@dataclass(frozen=True)
class PatientMention:
    start: int
    end: int
    surface: str
    kind: MentionKind


class EnvelopeReason(Enum):
    NON_ENGLISH = "NonEnglish"
    TOO_SHORT = "TooShort"
    TOO_LONG = "TooLong"
    INVALID_FORMAT = "InvalidFormat"


@dataclass(frozen=True)
class EnvelopeConfig:
    """Input bounds the scorers were trained within."""

    min_tokens: int = 10
    max_tokens: int = 600
    allowed_languages: tuple[str, ...] = ("en",)
    errata_title_prefixes: tuple[str, ...] = ("erratum", "corrigendum", "retraction")
    errata_abstract_prefixes: tuple[str, ...] = ("[this corrects the article",)


@dataclass(frozen=True)
class EnvelopeVerdict:
    in_envelope: bool
    reasons: tuple[EnvelopeReason, ...]
    language: str
    token_count: int


@dataclass
class TokenizedDoc:
    article_id: str
    text: str  # title + "\n" + abstract, unmodified
    title_len: int
    tokens: list[Token]
    sentence_spans: list[SentenceSpan]
    language: str
    language_confidence: float

    @property
    def token_count(self) -> int:
        return len(self.tokens)


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

# Word runs joined by single intra-word hyphens, so "46-year-old" is one token.
_TOKEN_RE = re.compile(r"\w+(?:-\w+)*", re.UNICODE)


def _tokenize(text: str) -> list[Token]:
    return [
        Token(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)
    ]


def normalize_tokenize(article: Article) -> TokenizedDoc:
    """Tokenize title+abstract, split sentences, and identify the language.

    Control characters and repeated whitespace never enter tokens; spans
    always index the original concatenated text.
    """
    text = article.title + "\n" + article.abstract
    tokens = _tokenize(text)
    doc = TokenizedDoc(
        article_id=article.id,
        text=text,
        title_len=len(article.title),
        tokens=tokens,
        sentence_spans=[],
        language="und",
        language_confidence=0.0,
    )
    doc.sentence_spans = split_sentences(doc)
    if _letters_only(text):
        doc.language, doc.language_confidence = detect_language(doc)
    return doc


# ---------------------------------------------------------------------------
# Sentence splitting
# ---------------------------------------------------------------------------

# Tokens (with trailing period) that never end a sentence.
ABBREVIATIONS = frozenset(
    {
        "vs.", "e.g.", "i.e.", "etc.", "cf.", "ca.", "al.", "fig.", "figs.",
        "dr.", "mr.", "mrs.", "ms.", "prof.", "no.", "nos.", "approx.",
        "resp.", "st.", "jr.", "sr.", "inc.", "ltd.", "dept.", "ed.", "eds.",
        "vol.", "pp.", "ref.", "refs.", "spp.", "subsp.",
    }
)

_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s)")
_WORD_BEFORE_RE = re.compile(r"(\S+)$")


def _abstract_boundaries(text: str, start: int, end: int) -> list[int]:
    """Indices just past sentence-final punctuation within text[start:end]."""
    boundaries = []
    for m in _BOUNDARY_RE.finditer(text, start, end):
        after = m.end()
        # require whitespace then an uppercase letter or digit
        k = after
        while k < end and text[k].isspace():
            k += 1
        if k == after or k >= end:
            continue
        if not (text[k].isupper() or text[k].isdigit()):
            continue
        before = _WORD_BEFORE_RE.search(text, start, m.end())
        if before and before.group(1).lower() in ABBREVIATIONS:
            continue
        boundaries.append(after)
    return boundaries


def _spans_between(text: str, start: int, end: int, cuts: list[int], index0: int) -> list[SentenceSpan]:
    spans = []
    pos = start
    for cut in cuts + [end]:
        while pos < cut and text[pos].isspace():
            pos += 1
        seg_end = cut
        while seg_end > pos and text[seg_end - 1].isspace():
            seg_end -= 1
        if seg_end > pos:
            spans.append(SentenceSpan(pos, seg_end, index0 + len(spans)))
        pos = cut
    return spans


def split_sentences(doc: TokenizedDoc) -> list[SentenceSpan]:
    """Rule-based sentence spans; the title is always its own sentence."""
    spans: list[SentenceSpan] = []
    if doc.title_len > 0 and doc.text[: doc.title_len].strip():
        title_spans = _spans_between(doc.text, 0, doc.title_len, [], 0)
        if title_spans:  # single span covering the trimmed title
            spans.append(SentenceSpan(title_spans[0].start, title_spans[-1].end, 0))
    abstract_start = doc.title_len + 1
    if abstract_start < len(doc.text):
        cuts = _abstract_boundaries(doc.text, abstract_start, len(doc.text))
        spans.extend(_spans_between(doc.text, abstract_start, len(doc.text), cuts, len(spans)))
    return spans


# ---------------------------------------------------------------------------
# Language identification (character trigrams, out-of-place distance)
# ---------------------------------------------------------------------------

_PROFILE_SIZE = 300
_MIN_CONFIDENT_CHARS = 20

# Seed prose for the bundled profiles. General register plus clinical
# vocabulary so abstracts rank cleanly.
_LANGUAGE_SEEDS = {
    "en": (
        "The study included adult patients who received the treatment for at "
        "least twelve weeks. The results of the analysis showed that the most "
        "common findings were mild and resolved without intervention. We "
        "report the outcomes of a large cohort followed in clinical practice. "
        "There were no significant differences between the groups at baseline. "
        "Patients with a history of heart disease were excluded from the "
        "trial. The safety profile was consistent with previous reports, and "
        "no new signals were identified during the follow-up period. These "
        "findings suggest that the treatment is effective and well tolerated "
        "in this population. Further research is needed to confirm whether "
        "the benefit persists over longer periods of observation. The authors "
        "declare that they have no competing interests. This is the first "
        "study to describe such an association in children and young adults."
    ),
    "fr": (
        "L'étude a inclus des patients adultes qui ont reçu le traitement "
        "pendant au moins douze semaines. Les résultats de l'analyse montrent "
        "que les effets les plus fréquents étaient légers et se sont résolus "
        "sans intervention. Nous rapportons les résultats d'une grande cohorte "
        "suivie en pratique clinique. Il n'y avait pas de différence "
        "significative entre les groupes au début de l'étude. Les patients "
        "ayant des antécédents de maladie cardiaque ont été exclus de l'essai. "
        "Le profil de tolérance était conforme aux données déjà publiées et "
        "aucun nouveau signal n'a été identifié pendant la période de suivi. "
        "Ces résultats suggèrent que le traitement est efficace et bien toléré "
        "dans cette population. Des recherches supplémentaires sont nécessaires "
        "pour confirmer si le bénéfice persiste à plus long terme. Les auteurs "
        "déclarent n'avoir aucun conflit d'intérêts."
    ),
    "de": (
        "Die Studie umfasste erwachsene Patienten, die die Behandlung über "
        "mindestens zwölf Wochen erhielten. Die Ergebnisse der Untersuchung "
        "zeigen, dass die häufigsten Befunde mild waren und ohne weitere "
        "Maßnahmen abklangen. Wir berichten über die Ergebnisse einer großen "
        "Kohorte aus der klinischen Praxis. Zwischen den Gruppen bestanden zu "
        "Beginn keine wesentlichen Unterschiede. Patienten mit einer "
        "Herzerkrankung in der Vorgeschichte wurden aus der Studie "
        "ausgeschlossen. Das Sicherheitsprofil entsprach den bisherigen "
        "Berichten, und während der Nachbeobachtung wurden keine neuen "
        "Signale festgestellt. Diese Ergebnisse deuten darauf hin, dass die "
        "Behandlung in dieser Gruppe wirksam und gut verträglich ist. Weitere "
        "Untersuchungen sind erforderlich, um zu bestätigen, ob der Nutzen "
        "über längere Zeiträume bestehen bleibt."
    ),
    "es": (
        "El estudio incluyó pacientes adultos que recibieron el tratamiento "
        "durante al menos doce semanas. Los resultados del análisis muestran "
        "que los hallazgos más frecuentes fueron leves y se resolvieron sin "
        "intervención. Presentamos los resultados de una gran cohorte seguida "
        "en la práctica clínica. No hubo diferencias significativas entre los "
        "grupos al inicio del estudio. Los pacientes con antecedentes de "
        "enfermedad cardíaca fueron excluidos del ensayo. El perfil de "
        "seguridad fue consistente con los informes anteriores y no se "
        "identificaron nuevas señales durante el seguimiento. Estos hallazgos "
        "sugieren que el tratamiento es eficaz y bien tolerado en esta "
        "población. Se necesita más investigación para confirmar si el "
        "beneficio se mantiene durante períodos más largos de observación."
    ),
    "pt": (
        "O estudo incluiu doentes adultos que receberam o tratamento durante "
        "pelo menos doze semanas. Os resultados da análise mostram que os "
        "achados mais frequentes foram ligeiros e resolveram sem intervenção. "
        "Apresentamos os resultados de uma grande coorte acompanhada na "
        "prática clínica. Não houve diferenças significativas entre os grupos "
        "no início do estudo. Os doentes com antecedentes de doença cardíaca "
        "foram excluídos do ensaio. O perfil de segurança foi consistente com "
        "os relatórios anteriores e não foram identificados novos sinais "
        "durante o acompanhamento. Estes achados sugerem que o tratamento é "
        "eficaz e bem tolerado nesta população. São necessárias mais "
        "investigações para confirmar se o benefício se mantém ao longo de "
        "períodos mais prolongados de observação."
    ),
    "it": (
        "Lo studio ha incluso pazienti adulti che hanno ricevuto il "
        "trattamento per almeno dodici settimane. I risultati dell'analisi "
        "mostrano che gli effetti più frequenti erano lievi e si sono risolti "
        "senza intervento. Riportiamo i risultati di un'ampia coorte seguita "
        "nella pratica clinica. Non vi erano differenze significative tra i "
        "gruppi all'inizio dello studio. I pazienti con una storia di "
        "malattia cardiaca sono stati esclusi dalla sperimentazione. Il "
        "profilo di sicurezza era coerente con i dati già pubblicati e non "
        "sono stati identificati nuovi segnali durante il periodo di "
        "osservazione. Questi risultati suggeriscono che il trattamento è "
        "efficace e ben tollerato in questa popolazione. Sono necessarie "
        "ulteriori ricerche per confermare se il beneficio persiste nel tempo."
    ),
}


def _letters_only(text: str) -> str:
    """Lowercase, map non-letters to spaces, collapse runs, pad with spaces."""
    chars = [
        c if unicodedata.category(c).startswith("L") else " " for c in text.lower()
    ]
    collapsed = re.sub(r"\s+", " ", "".join(chars)).strip()
    return f" {collapsed} " if collapsed else ""


def _trigram_ranks(text: str, limit: int = _PROFILE_SIZE) -> dict[str, int]:
    counts: dict[str, int] = {}
    for i in range(len(text) - 2):
        g = text[i : i + 3]
        counts[g] = counts.get(g, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:limit]
    return {g: rank for rank, (g, _) in enumerate(ranked)}


_PROFILES: dict[str, dict[str, int]] = {
    code: _trigram_ranks(_letters_only(seed)) for code, seed in _LANGUAGE_SEEDS.items()
}


def _out_of_place(doc_ranks: dict[str, int], ref_ranks: dict[str, int]) -> float:
    if not doc_ranks:
        return 1.0
    penalty = _PROFILE_SIZE
    total = sum(
        abs(rank - ref_ranks[g]) if g in ref_ranks else penalty
        for g, rank in doc_ranks.items()
    )
    return total / (len(doc_ranks) * penalty)


def detect_language(doc: TokenizedDoc | str) -> tuple[str, float]:
    """Best language code and a margin-based confidence in [0, 1].

    Ranks the input's character-trigram profile against the bundled
    profiles by out-of-place distance. Inputs under 20 letters return
    confidence 0. Empty input is an error.
    """
    text = doc if isinstance(doc, str) else doc.text
    normalized = _letters_only(text)
    if not normalized.strip():
        raise LanguageError("undetectable: input has no letters")
    doc_ranks = _trigram_ranks(normalized)
    scored = sorted(
        ((_out_of_place(doc_ranks, prof), code) for code, prof in _PROFILES.items())
    )
    best_dist, best_code = scored[0]
    if len(normalized.strip()) < _MIN_CONFIDENT_CHARS:
        return best_code, 0.0
    runner_dist = scored[1][0]
    if runner_dist <= 0:
        return best_code, 0.0
    confidence = min(1.0, 3.0 * (runner_dist - best_dist) / runner_dist)
    return best_code, max(0.0, confidence)


# ---------------------------------------------------------------------------
# Patient mention extraction
# ---------------------------------------------------------------------------

_UNITS = "one|two|three|four|five|six|seven|eight|nine"
_TEENS = "ten|eleven|twelve|thirteen|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen"
_TENS = "twenty|thirty|forty|fifty|sixty|seventy|eighty|ninety"
_SPELLED = rf"(?:(?:{_TENS})(?:-(?:{_UNITS}))?|(?:{_TEENS})|(?:{_UNITS}))"

_AGE_RE = re.compile(
    rf"\b(?:\d{{1,3}}|{_SPELLED})[-\s](?:year|month|week|day)s?[-\s]old\b",
    re.IGNORECASE,
)

PERSON_NOUNS = frozenset(
    {"man", "woman", "male", "female", "boy", "girl", "patient", "infant", "neonate"}
)

DEFAULT_CASE_REPORT_PATTERNS = (
    r"\bcase report of\b",
    r"\bwe report (?:a|the) case\b",
    r"\ba case of \S[^.;]{0,60}? in a patient\b",
)


@dataclass(frozen=True)
class PatientPatternConfig:
    """Configurable patterns for identifiable-patient extraction."""

    person_nouns: tuple[str, ...] = tuple(sorted(PERSON_NOUNS))
    case_report_patterns: tuple[str, ...] = DEFAULT_CASE_REPORT_PATTERNS
    person_window_tokens: int = 3


def extract_patient_mentions(
    doc: TokenizedDoc, config: PatientPatternConfig | None = None
) -> list[PatientMention]:
    """Deterministic pattern-based extraction of identifiable patients.

    Age expressions ("58-year-old", "forty-six year old") extend through a
    person noun found within the next few tokens; explicit case-report
    phrases match directly. Mentions are ordered by span and never overlap.
    """
    cfg = config or PatientPatternConfig()
    nouns = set(cfg.person_nouns)
    text = doc.text
    candidates: list[PatientMention] = []

    for m in _AGE_RE.finditer(text):
        end = m.end()
        following = [t for t in doc.tokens if t.start >= end][: cfg.person_window_tokens]
        # extend through the last person noun in the window: "male patient"
        for tok in following:
            if tok.text in nouns:
                end = tok.end
        candidates.append(
            PatientMention(m.start(), end, text[m.start() : end], MentionKind.AGE_SEX_INDIVIDUAL)
        )

    for pattern in cfg.case_report_patterns:
        for m in re.finditer(pattern, text, re.IGNORECASE):
            candidates.append(
                PatientMention(
                    m.start(), m.end(), text[m.start() : m.end()], MentionKind.EXPLICIT_CASE_REPORT
                )
            )

    candidates.sort(key=lambda c: (c.start, -c.end))
    accepted: list[PatientMention] = []
    for cand in candidates:
        if accepted and cand.start < accepted[-1].end:
            continue
        accepted.append(cand)
    return accepted


# ---------------------------------------------------------------------------
# Operating envelope
# ---------------------------------------------------------------------------


def check_envelope(doc: TokenizedDoc, bounds: EnvelopeConfig) -> EnvelopeVerdict:
    """Accumulate every envelope violation; never short-circuits."""
    reasons: list[EnvelopeReason] = []
    if doc.language not in bounds.allowed_languages:
        reasons.append(EnvelopeReason.NON_ENGLISH)
    if doc.token_count < bounds.min_tokens:
        reasons.append(EnvelopeReason.TOO_SHORT)
    if doc.token_count > bounds.max_tokens:
        reasons.append(EnvelopeReason.TOO_LONG)
    title = doc.text[: doc.title_len].lstrip().lower()
    abstract = doc.text[doc.title_len + 1 :].lstrip().lower()
    if any(title.startswith(p.lower()) for p in bounds.errata_title_prefixes) or any(
        abstract.startswith(p.lower()) for p in bounds.errata_abstract_prefixes
    ):
        reasons.append(EnvelopeReason.INVALID_FORMAT)
    return EnvelopeVerdict(
        in_envelope=not reasons,
        reasons=tuple(reasons),
        language=doc.language,
        token_count=doc.token_count,
    )

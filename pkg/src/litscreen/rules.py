"""Ordered rule cascade producing the final screening label with a full trace.

The cascade is deliberately fail-safe: anything outside the operating
envelope routes to human screening (SuspectAdverse) without consulting the
scorers, and the default branch is the only path to NotSuspect.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from litscreen.corpus import Label
from litscreen.preprocess import EnvelopeVerdict, PatientMention, TokenizedDoc


class CascadeContractError(ValueError):
    """Scores supplied for out-of-envelope input, or missing when required."""


class RuleId(Enum):
    R1_ENVELOPE = "R1_envelope"
    R2_SCORER_A = "R2_scorer_a"
    R3_SCORER_B_HIGHCONF = "R3_scorer_b_highconf"
    R4_IDENTIFIABLE_PATIENT = "R4_identifiable_patient"
    R5_DEFAULT = "R5_default"


CASCADE_ORDER = (
    RuleId.R1_ENVELOPE,
    RuleId.R2_SCORER_A,
    RuleId.R3_SCORER_B_HIGHCONF,
    RuleId.R4_IDENTIFIABLE_PATIENT,
    RuleId.R5_DEFAULT,
)


@dataclass(frozen=True)
class RuleThresholds:
    theta_a: float
    theta_b: float

    def __post_init__(self) -> None:
        for name, value in (("theta_a", self.theta_a), ("theta_b", self.theta_b)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class RuleTraceEntry:
    rule_id: RuleId
    evaluated: bool
    fired: bool
    detail: str


@dataclass(frozen=True)
class RuleTrace:
    entries: tuple[RuleTraceEntry, ...]

    def __post_init__(self) -> None:
        if tuple(e.rule_id for e in self.entries) != CASCADE_ORDER:
            raise ValueError("trace must list every rule in cascade order")
        fired = [i for i, e in enumerate(self.entries) if e.fired]
        if len(fired) != 1:
            raise ValueError("exactly one rule must fire")
        if any(e.evaluated for e in self.entries[fired[0] + 1 :]):
            raise ValueError("no rule after the fired one may be evaluated")
        if any(e.fired and not e.evaluated for e in self.entries):
            raise ValueError("a fired rule must have been evaluated")

    @property
    def fired_rule(self) -> RuleId:
        return next(e.rule_id for e in self.entries if e.fired)


@dataclass(frozen=True)
class ScreeningPrediction:
    article_id: str
    label: Label
    fired_rule: RuleId
    score_a: float | None
    score_b: float | None
    envelope: EnvelopeVerdict
    trace: RuleTrace

    def __post_init__(self) -> None:
        if self.fired_rule is RuleId.R1_ENVELOPE:
            if self.label is not Label.SUSPECT_ADVERSE:
                raise ValueError("envelope failures must route to SuspectAdverse")
            if self.score_a is not None or self.score_b is not None:
                raise ValueError("out-of-envelope predictions carry no scores")
        elif self.fired_rule is RuleId.R5_DEFAULT:
            if self.label is not Label.NOT_SUSPECT:
                raise ValueError("the default rule labels NotSuspect")
        elif self.label is not Label.SUSPECT_ADVERSE:
            raise ValueError("R2-R4 label SuspectAdverse")
        if self.trace.fired_rule is not self.fired_rule:
            raise ValueError("fired_rule must match the trace")


def apply_rule_cascade(
    doc: TokenizedDoc,
    envelope: EnvelopeVerdict,
    mentions: list[PatientMention],
    scores: tuple[float, float] | None,
    thresholds: RuleThresholds,
) -> ScreeningPrediction:
    """Evaluate R1..R5 in order; the first rule whose condition holds fires.

    Scores must be present exactly when the document is in envelope: the
    scorers never run on out-of-envelope input, and an in-envelope document
    always has both scores.
    """
    if envelope.in_envelope and scores is None:
        raise CascadeContractError("in-envelope input requires both scores")
    if not envelope.in_envelope and scores is not None:
        raise CascadeContractError("out-of-envelope input must not carry scores")

    entries: list[RuleTraceEntry] = []
    fired: RuleId | None = None

    def skip(rule: RuleId) -> None:
        entries.append(RuleTraceEntry(rule, evaluated=False, fired=False, detail=""))

    reasons = ",".join(r.value for r in envelope.reasons)
    if not envelope.in_envelope:
        fired = RuleId.R1_ENVELOPE
        entries.append(
            RuleTraceEntry(
                RuleId.R1_ENVELOPE, True, True, f"out of envelope: {reasons}"
            )
        )
        for rule in CASCADE_ORDER[1:]:
            skip(rule)
    else:
        entries.append(
            RuleTraceEntry(RuleId.R1_ENVELOPE, True, False, "in envelope")
        )
        assert scores is not None
        score_a, score_b = scores
        checks = (
            (
                RuleId.R2_SCORER_A,
                score_a >= thresholds.theta_a,
                f"score_a={score_a:.6f} vs theta_a={thresholds.theta_a:.6f}",
            ),
            (
                RuleId.R3_SCORER_B_HIGHCONF,
                score_b >= thresholds.theta_b,
                f"score_b={score_b:.6f} vs theta_b={thresholds.theta_b:.6f}",
            ),
            (
                RuleId.R4_IDENTIFIABLE_PATIENT,
                bool(mentions),
                ("mentions: " + "; ".join(m.surface for m in mentions))
                if mentions
                else "no identifiable patient",
            ),
        )
        for rule, condition, detail in checks:
            if fired is not None:
                skip(rule)
                continue
            entries.append(RuleTraceEntry(rule, True, condition, detail))
            if condition:
                fired = rule
        if fired is None:
            fired = RuleId.R5_DEFAULT
            entries.append(
                RuleTraceEntry(RuleId.R5_DEFAULT, True, True, "no rule matched")
            )
        else:
            skip(RuleId.R5_DEFAULT)

    label = Label.NOT_SUSPECT if fired is RuleId.R5_DEFAULT else Label.SUSPECT_ADVERSE
    in_env = envelope.in_envelope
    return ScreeningPrediction(
        article_id=doc.article_id,
        label=label,
        fired_rule=fired,
        score_a=scores[0] if in_env and scores else None,
        score_b=scores[1] if in_env and scores else None,
        envelope=envelope,
        trace=RuleTrace(tuple(entries)),
    )


def prediction_to_dict(prediction: ScreeningPrediction) -> dict:
    """JSON-ready view carrying the full trace, for logs and the service."""
    return {
        "article_id": prediction.article_id,
        "label": prediction.label.value,
        "fired_rule": prediction.fired_rule.value,
        "score_a": prediction.score_a,
        "score_b": prediction.score_b,
        "envelope": {
            "in_envelope": prediction.envelope.in_envelope,
            "reasons": [r.value for r in prediction.envelope.reasons],
            "language": prediction.envelope.language,
            "token_count": prediction.envelope.token_count,
        },
        "trace": [
            {
                "rule_id": entry.rule_id.value,
                "evaluated": entry.evaluated,
                "fired": entry.fired,
                "detail": entry.detail,
            }
            for entry in prediction.trace.entries
        ],
    }


def audit_line(prediction: ScreeningPrediction, timestamp_utc: str) -> str:
    """One tab-separated line per prediction for append-only audit logs."""
    fmt = lambda s: "-" if s is None else f"{s:.6f}"  # noqa: E731
    reasons = ",".join(r.value for r in prediction.envelope.reasons) or "-"
    return "\t".join(
        (
            prediction.article_id,
            prediction.fired_rule.value,
            prediction.label.value,
            fmt(prediction.score_a),
            fmt(prediction.score_b),
            reasons,
            timestamp_utc,
        )
    )

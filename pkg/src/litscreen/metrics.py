"""Confusion counting, recall, false-positive rate, and annotator agreement.

The positive class throughout is SuspectAdverse. Undefined metrics raise
rather than returning sentinels so calibration can never silently optimize
over a degenerate set.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

from litscreen.corpus import Label


class UndefinedMetricError(ValueError):
    """A metric's denominator is zero for the given counts."""


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_counts(pairs: Sequence[tuple[Label, Label]]) -> ConfusionCounts:
    """Count (predicted, gold) pairs; positive class is SuspectAdverse."""
    tp = fp = tn = fn = 0
    for predicted, gold in pairs:
        if predicted is Label.SUSPECT_ADVERSE:
            if gold is Label.SUSPECT_ADVERSE:
                tp += 1
            else:
                fp += 1
        else:
            if gold is Label.SUSPECT_ADVERSE:
                fn += 1
            else:
                tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def recall(c: ConfusionCounts) -> float:
    if c.tp + c.fn == 0:
        raise UndefinedMetricError("recall undefined: no gold positives")
    return c.tp / (c.tp + c.fn)


def false_positive_rate(c: ConfusionCounts) -> float:
    """FP / (FP + TN): the effort cost of over-flagging negatives."""
    if c.fp + c.tn == 0:
        raise UndefinedMetricError("false positive rate undefined: no gold negatives")
    return c.fp / (c.fp + c.tn)


def cohens_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement between two aligned label sequences.

    kappa = (p_o - p_e) / (1 - p_e), with p_e from the marginal label
    distributions. When p_e == 1 (both annotators constant and identical),
    returns 1.0.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty label lists")
    n = len(a)
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    marg_a = Counter(a)
    marg_b = Counter(b)
    p_e = sum(marg_a[k] * marg_b.get(k, 0) for k in marg_a) / (n * n)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def report_block(c: ConfusionCounts) -> str:
    """Key-value text block for logs and reports."""
    lines = [
        f"tp = {c.tp}",
        f"fp = {c.fp}",
        f"tn = {c.tn}",
        f"fn = {c.fn}",
    ]
    if c.tp + c.fn > 0:
        lines.append(f"recall = {recall(c):.6f}")
    if c.fp + c.tn > 0:
        lines.append(f"fpr = {false_positive_rate(c):.6f}")
    return "\n".join(lines)

"""Inter-annotator agreement via Cohen's kappa.

Annotations here are multi-label sets, so kappa is computed per label on
the binary presence/absence decision, with a mean across labels as the
summary number. kappa = (p_o - p_e) / (1 - p_e); a degenerate table with
p_e = 1 (both annotators constant and equal) has no defined kappa and is
flagged instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from ..core import AnnotationRecord, CoherenceRelation, PRIMARY_RELATIONS


class CoverageMismatchError(ValueError):
    """The two annotators did not cover the same pair set."""


@dataclass
class AgreementReport:
    p_observed: float
    p_expected: float
    kappa: float | None
    n_items: int
    degenerate: bool = False


@dataclass
class AgreementSummary:
    per_label: dict[str, AgreementReport]
    mean_kappa: float | None
    n_items: int


def kappa_from_flags(flags_a: Sequence[bool], flags_b: Sequence[bool]) -> AgreementReport:
    """Cohen's kappa for two aligned binary decision sequences."""
    if len(flags_a) != len(flags_b):
        raise CoverageMismatchError(
            f"decision counts differ: {len(flags_a)} vs {len(flags_b)}"
        )
    n = len(flags_a)
    if n == 0:
        return AgreementReport(0.0, 0.0, None, 0, degenerate=True)
    agree = sum(1 for x, y in zip(flags_a, flags_b) if x == y)
    p_o = agree / n
    a_yes = sum(flags_a) / n
    b_yes = sum(flags_b) / n
    p_e = a_yes * b_yes + (1 - a_yes) * (1 - b_yes)
    if p_e == 1.0:
        return AgreementReport(p_o, p_e, None, n, degenerate=True)
    return AgreementReport(p_o, p_e, (p_o - p_e) / (1 - p_e), n)


def _aligned_label_sets(
    annotations_a: Iterable[AnnotationRecord],
    annotations_b: Iterable[AnnotationRecord],
) -> tuple[list[str], dict[str, frozenset], dict[str, frozenset]]:
    by_a = {rec.pair_id: rec.labels.relations for rec in annotations_a}
    by_b = {rec.pair_id: rec.labels.relations for rec in annotations_b}
    if set(by_a) != set(by_b):
        only_a = sorted(set(by_a) - set(by_b))[:3]
        only_b = sorted(set(by_b) - set(by_a))[:3]
        raise CoverageMismatchError(
            f"annotators cover different pairs (e.g., only A: {only_a}, only B: {only_b})"
        )
    return sorted(by_a), by_a, by_b


def cohen_kappa(
    annotations_a: Iterable[AnnotationRecord],
    annotations_b: Iterable[AnnotationRecord],
    label: CoherenceRelation,
) -> AgreementReport:
    """Binary kappa on one label's presence over the shared pair set."""
    order, by_a, by_b = _aligned_label_sets(annotations_a, annotations_b)
    flags_a = [label in by_a[pid] for pid in order]
    flags_b = [label in by_b[pid] for pid in order]
    return kappa_from_flags(flags_a, flags_b)


def agreement_summary(
    annotations_a: Iterable[AnnotationRecord],
    annotations_b: Iterable[AnnotationRecord],
    labels: Sequence[CoherenceRelation] = PRIMARY_RELATIONS,
) -> AgreementSummary:
    """Per-label kappa plus the mean over labels with a defined kappa."""
    annotations_a = list(annotations_a)
    annotations_b = list(annotations_b)
    per_label: dict[str, AgreementReport] = {}
    n_items = 0
    for label in labels:
        rep = cohen_kappa(annotations_a, annotations_b, label)
        per_label[label.value] = rep
        n_items = rep.n_items
    defined = [r.kappa for r in per_label.values() if r.kappa is not None]
    mean_kappa = sum(defined) / len(defined) if defined else None
    return AgreementSummary(per_label=per_label, mean_kappa=mean_kappa, n_items=n_items)

"""Distribution and overlap statistics over annotated pairs.

All statistics treat a pair's label set as the union over its annotators:
multiple relations can hold for one pair, so a label counts for a pair as
soon as any annotator assigned it. Percentages are per label and need not
sum to 100 in the multi-label setting; facet percentages are conditioned
on the pair carrying Meta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..core import (
    AnnotationRecord,
    CoherenceRelation,
    ImageCaptionPair,
    MetaFacet,
)
from ..corpus import AnnotationStore, CaptionCorpus


class UnknownPairError(KeyError):
    pass


@dataclass
class GroupDistribution:
    group: str
    n_pairs: int
    label_pct: dict[str, float]
    n_meta_pairs: int
    facet_pct: dict[str, float]


@dataclass
class DistributionReport:
    group_by: str | None
    groups: list[GroupDistribution] = field(default_factory=list)

    def group(self, name: str) -> GroupDistribution:
        for g in self.groups:
            if g.group == name:
                return g
        raise KeyError(name)


@dataclass
class OverlapRate:
    label_a: str
    label_b: str
    convention: str  # 'a' | 'b' | 'all'
    n_both: int
    n_denominator: int
    percent: float | None

    @property
    def undefined(self) -> bool:
        return self.percent is None


def union_labels(
    annotations: Iterable[AnnotationRecord],
) -> dict[str, tuple[set[CoherenceRelation], set[MetaFacet]]]:
    """Per-pair union of relations and facets across annotators."""
    merged: dict[str, tuple[set[CoherenceRelation], set[MetaFacet]]] = {}
    for rec in annotations:
        rels, facets = merged.setdefault(rec.pair_id, (set(), set()))
        rels.update(rec.labels.relations)
        facets.update(rec.labels.facets)
    return merged


def _pair_index(pairs: CaptionCorpus | Iterable[ImageCaptionPair]) -> Mapping[str, ImageCaptionPair]:
    if isinstance(pairs, CaptionCorpus):
        return {p.pair_id: p for p in pairs}
    return {p.pair_id: p for p in pairs}


def _group_key(pair: ImageCaptionPair, group_by: str | None) -> str:
    if group_by is None:
        return "all"
    if group_by == "origin":
        return pair.origin.value
    if group_by == "source_domain":
        return pair.source_domain
    raise ValueError(f"unknown group_by {group_by!r}")


def relation_distribution(
    annotations: AnnotationStore | Iterable[AnnotationRecord],
    pairs: CaptionCorpus | Iterable[ImageCaptionPair],
    group_by: str | None = None,
) -> DistributionReport:
    """Percentage of annotated pairs bearing each label, per group.

    The denominator of each group is the number of annotated pairs in it
    (recorded in ``n_pairs``); facet percentages use the group's Meta
    pair count as denominator.
    """
    index = _pair_index(pairs)
    merged = union_labels(annotations)
    for pid in merged:
        if pid not in index:
            raise UnknownPairError(f"annotation references unknown pair {pid!r}")

    grouped: dict[str, list[tuple[set[CoherenceRelation], set[MetaFacet]]]] = {}
    for pid, labels in merged.items():
        grouped.setdefault(_group_key(index[pid], group_by), []).append(labels)

    report = DistributionReport(group_by=group_by)
    for name in sorted(grouped):
        labelled = grouped[name]
        n = len(labelled)
        label_pct = {
            rel.value: 100.0 * sum(1 for rels, _ in labelled if rel in rels) / n
            for rel in CoherenceRelation
        }
        meta_pairs = [facets for rels, facets in labelled if CoherenceRelation.META in rels]
        n_meta = len(meta_pairs)
        facet_pct = {
            facet.value: (
                100.0 * sum(1 for fs in meta_pairs if facet in fs) / n_meta if n_meta else 0.0
            )
            for facet in MetaFacet
        }
        report.groups.append(
            GroupDistribution(
                group=name,
                n_pairs=n,
                label_pct=label_pct,
                n_meta_pairs=n_meta,
                facet_pct=facet_pct,
            )
        )
    return report


def overlap_rate(
    annotations: AnnotationStore | Iterable[AnnotationRecord],
    label_a: CoherenceRelation,
    label_b: CoherenceRelation,
    denominator: str = "all",
    pair_ids: set[str] | None = None,
) -> OverlapRate:
    """How often ``label_a`` and ``label_b`` co-occur on a pair.

    ``denominator`` picks the convention: 'a' divides by pairs bearing
    ``label_a``, 'b' by pairs bearing ``label_b``, 'all' by every
    annotated pair in scope. The default is 'all' (co-occurrence as a
    share of all pairs), the reading of "overlap X% of the time" that our
    statistics reports use; the other conventions stay available for
    comparison against externally reported numbers.
    """
    if denominator not in ("a", "b", "all"):
        raise ValueError(f"unknown denominator convention {denominator!r}")
    merged = union_labels(annotations)
    if pair_ids is not None:
        merged = {pid: v for pid, v in merged.items() if pid in pair_ids}
    n_a = sum(1 for rels, _ in merged.values() if label_a in rels)
    n_b = sum(1 for rels, _ in merged.values() if label_b in rels)
    n_both = sum(1 for rels, _ in merged.values() if label_a in rels and label_b in rels)
    denom = {"a": n_a, "b": n_b, "all": len(merged)}[denominator]
    percent = 100.0 * n_both / denom if denom else None
    return OverlapRate(
        label_a=label_a.value,
        label_b=label_b.value,
        convention=denominator,
        n_both=n_both,
        n_denominator=denom,
        percent=percent,
    )


def genre_distribution(
    annotations: AnnotationStore | Iterable[AnnotationRecord],
    pairs: CaptionCorpus | Iterable[ImageCaptionPair],
    top: int | None = None,
) -> DistributionReport:
    """Relation distribution per source domain, largest domains first."""
    report = relation_distribution(annotations, pairs, group_by="source_domain")
    report.groups.sort(key=lambda g: (-g.n_pairs, g.group))
    if top is not None:
        report.groups = report.groups[:top]
    return report

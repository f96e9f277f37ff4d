"""Domain types shared by every other module: coherence relations,
image-caption pairs, and annotation records, plus label parsing and
relation-set validation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable


class CoherenceRelation(enum.Enum):
    """The coherence relations an annotator can assign to one pair.

    The first six members are the content relations and are exactly the
    classifier target classes; the two Other members mark degenerate
    pairs and never feed the classifiers.
    """

    VISIBLE = "Visible"
    SUBJECTIVE = "Subjective"
    ACTION = "Action"
    STORY = "Story"
    META = "Meta"
    IRRELEVANT = "Irrelevant"
    OTHER_TEXT = "Other-Text"
    OTHER_GIBBERISH = "Other-Gibberish"

    @property
    def label(self) -> str:
        return self.value

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.value


#: Classifier target classes, in canonical order.
PRIMARY_RELATIONS: tuple[CoherenceRelation, ...] = (
    CoherenceRelation.VISIBLE,
    CoherenceRelation.SUBJECTIVE,
    CoherenceRelation.ACTION,
    CoherenceRelation.STORY,
    CoherenceRelation.META,
    CoherenceRelation.IRRELEVANT,
)

#: Labels that may never co-occur with anything else.
EXCLUSIVE_RELATIONS: tuple[CoherenceRelation, ...] = (
    CoherenceRelation.IRRELEVANT,
    CoherenceRelation.OTHER_TEXT,
    CoherenceRelation.OTHER_GIBBERISH,
)


class MetaFacet(enum.Enum):
    """Fine-grained facet of the Meta relation."""

    WHEN = "When"
    HOW = "How"
    WHERE = "Where"

    @property
    def label(self) -> str:
        return self.value


class Origin(enum.Enum):
    """Whether a caption was written by a human or emitted by a model."""

    GROUND_TRUTH = "GroundTruth"
    MODEL_OUTPUT = "ModelOutput"


class UnknownLabelError(ValueError):
    """Raised when a label string matches no known relation or facet."""


_RELATION_BY_KEY = {r.value.lower(): r for r in CoherenceRelation}
_RELATION_BY_KEY.update({r.name.lower(): r for r in CoherenceRelation})
_FACET_BY_KEY = {f.value.lower(): f for f in MetaFacet}


def parse_label(text: str) -> CoherenceRelation:
    """Case-insensitive parse of a canonical relation name."""
    rel = _RELATION_BY_KEY.get(text.strip().lower())
    if rel is None:
        accepted = ", ".join(r.value for r in CoherenceRelation)
        raise UnknownLabelError(f"unknown relation label {text!r}; accepted: {accepted}")
    return rel


def format_label(relation: CoherenceRelation) -> str:
    return relation.value


def parse_facet(text: str) -> MetaFacet:
    facet = _FACET_BY_KEY.get(text.strip().lower())
    if facet is None:
        accepted = ", ".join(f.value for f in MetaFacet)
        raise UnknownLabelError(f"unknown facet label {text!r}; accepted: {accepted}")
    return facet


@dataclass(frozen=True)
class RelationSet:
    """The multi-label judgment for one image-caption pair.

    ``facets`` refine the Meta relation and are only meaningful when
    Meta is present; validity is checked by :func:`validate_relation_set`,
    not at construction time, so invalid candidates can exist long
    enough to be reported.
    """

    relations: frozenset[CoherenceRelation] = field(default_factory=frozenset)
    facets: frozenset[MetaFacet] = field(default_factory=frozenset)

    @classmethod
    def of(
        cls,
        relations: Iterable[CoherenceRelation | str],
        facets: Iterable[MetaFacet | str] = (),
    ) -> "RelationSet":
        rels = frozenset(
            r if isinstance(r, CoherenceRelation) else parse_label(r) for r in relations
        )
        fs = frozenset(f if isinstance(f, MetaFacet) else parse_facet(f) for f in facets)
        return cls(relations=rels, facets=fs)

    def primary_relations(self) -> tuple[CoherenceRelation, ...]:
        """Content relations present, in canonical order."""
        return tuple(r for r in PRIMARY_RELATIONS if r in self.relations)

    def relation_labels(self) -> list[str]:
        """Canonical strings in canonical order (stable serialization)."""
        order = list(CoherenceRelation)
        return [r.value for r in sorted(self.relations, key=order.index)]

    def facet_labels(self) -> list[str]:
        order = list(MetaFacet)
        return [f.value for f in sorted(self.facets, key=order.index)]


def validate_relation_set(rs: RelationSet) -> list[str]:
    """Check the annotation-protocol constraints on ``rs``.

    Returns a list of violation messages; an empty list means the set is
    valid. Violations are data, not exceptions, so a service can surface
    them to the annotator.
    """
    violations: list[str] = []
    if not rs.relations:
        violations.append("relation set must be non-empty")
    for excl in EXCLUSIVE_RELATIONS:
        if excl in rs.relations and len(rs.relations) > 1:
            violations.append(f"{excl.value} must be exclusive")
    if rs.facets and CoherenceRelation.META not in rs.relations:
        violations.append("facet without Meta")
    return violations


@dataclass(frozen=True)
class ImageCaptionPair:
    """One image-caption pair with its provenance."""

    pair_id: str
    image_ref: str
    caption: str
    source_domain: str = ""
    origin: Origin = Origin.GROUND_TRUTH


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's judgment on one pair."""

    pair_id: str
    annotator_id: str
    labels: RelationSet
    comment: str | None = None
    timestamp: int = 0

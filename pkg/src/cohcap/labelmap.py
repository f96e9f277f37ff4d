"""Deterministic collapse of a multi-label relation set to a single
training label.

The rules, in order:

1. Meta present            -> Meta
2. Visible present and neither Meta nor Subjective -> Visible
3. otherwise              -> uniform draw from the set's content relations

The rule-3 draw uses a fixed 64-bit mix generator (splitmix64 finalizer)
keyed on (seed, relation-set bitmask), so the same set always maps to the
same label under one seed, on any platform or language. Regenerating a
single-label dataset is therefore exactly reproducible from the seed.
"""

from __future__ import annotations

from .core import CoherenceRelation, PRIMARY_RELATIONS, RelationSet

_MASK64 = (1 << 64) - 1


class EmptyPrimarySetError(ValueError):
    """The set holds no content relation (Other-only pairs are excluded upstream)."""


def _mix64(x: int) -> int:
    """splitmix64 output function; a bijective avalanche mix on 64 bits."""
    x &= _MASK64
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return x ^ (x >> 31)


def relation_set_key(rs: RelationSet) -> int:
    """Stable bitmask of the content relations, independent of the pair."""
    mask = 0
    for i, rel in enumerate(PRIMARY_RELATIONS):
        if rel in rs.relations:
            mask |= 1 << i
    return mask


def mapping_oracle(rs: RelationSet) -> frozenset[CoherenceRelation]:
    """Exact set of labels :func:`map_to_single` may return for ``rs``."""
    primaries = rs.primary_relations()
    if not primaries:
        raise EmptyPrimarySetError(f"no content relation in {rs.relation_labels()}")
    if CoherenceRelation.META in rs.relations:
        return frozenset({CoherenceRelation.META})
    if (
        CoherenceRelation.VISIBLE in rs.relations
        and CoherenceRelation.SUBJECTIVE not in rs.relations
    ):
        return frozenset({CoherenceRelation.VISIBLE})
    return frozenset(primaries)


def map_to_single(rs: RelationSet, seed: int) -> CoherenceRelation:
    """Collapse ``rs`` to one of the six content relations.

    Deterministic given (rs, seed); rule-3 candidates are the set's
    content relations in canonical order, never the Other labels.

    The domain is any set with at least one content relation. That is
    deliberately wider than what a single annotator may submit: the sets
    arriving here are unions across annotators, and a union can combine
    one annotator's Irrelevant with another's Visible even though each
    record alone satisfies the exclusivity rule.
    """
    primaries = rs.primary_relations()
    if not primaries:
        raise EmptyPrimarySetError(f"no content relation in {rs.relation_labels()}")
    if CoherenceRelation.META in rs.relations:
        return CoherenceRelation.META
    if (
        CoherenceRelation.VISIBLE in rs.relations
        and CoherenceRelation.SUBJECTIVE not in rs.relations
    ):
        return CoherenceRelation.VISIBLE
    draw = _mix64((seed & _MASK64) ^ _mix64(relation_set_key(rs)))
    return primaries[draw % len(primaries)]

"""Deterministic desk-scale corpora: small annotated stores whose
statistics are exact by construction, plus caption-training corpora for
memorization and label-conditioning runs. Everything here is a pure
function of its seed, so tests and command-line demos can regenerate
identical data offline.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .caption.bpe import Vocab, build_vocab
from .caption.model import CaptionerBatch
from .core import (
    AnnotationRecord,
    CoherenceRelation,
    ImageCaptionPair,
    Origin,
    RelationSet,
)

V = CoherenceRelation.VISIBLE
S = CoherenceRelation.SUBJECTIVE
A = CoherenceRelation.ACTION
ST = CoherenceRelation.STORY
M = CoherenceRelation.META
IRR = CoherenceRelation.IRRELEVANT
OT = CoherenceRelation.OTHER_TEXT
OG = CoherenceRelation.OTHER_GIBBERISH


# --------------------------------------------------------------- golden store
#
# 200 pairs in labeled blocks, one annotator, all arithmetic visible:
#
#   block                      pairs  running total
#   {Visible, Meta}               45     45     <- the Visible/Meta overlap
#   {Meta}                         5     50     <- Meta total 50
#   {Visible, Subjective}         20     70
#   {Visible, Action}             38    108
#   {Visible, Story}              27    135     <- Visible total 130
#   {Story}                       33    168     <- Story total 60
#   {Irrelevant}                   6    174
#   {Other-Text}                  26    200
#
# Facets cover the 50 Meta pairs exactly once:
#   {When, How} x13, {When} x4, {How} x19, {Where} x14
#   -> When 17, How 32, Where 14.
#
# Expected percentages over 200 pairs (exact): Visible 65.0, Subjective
# 10.0, Action 19.0, Story 30.0, Meta 25.0, Irrelevant 3.0, Other-Text
# 13.0; facets over 50 Meta pairs: When 34.0, How 64.0, Where 28.0;
# Visible-Meta co-occurrence 45/200 = 22.5.

GOLDEN_EXPECTED = {
    "n_pairs": 200,
    "label_pct": {
        "Visible": 65.0,
        "Subjective": 10.0,
        "Action": 19.0,
        "Story": 30.0,
        "Meta": 25.0,
        "Irrelevant": 3.0,
        "Other-Text": 13.0,
        "Other-Gibberish": 0.0,
    },
    "n_meta_pairs": 50,
    "facet_pct": {"When": 34.0, "How": 64.0, "Where": 28.0},
    "visible_meta_overlap_pct": 22.5,
    "visible_meta_overlap_n": 45,
}

_GOLDEN_BLOCKS: list[tuple[int, list[CoherenceRelation], list[str]]] = (
    [(13, [V, M], ["When", "How"]), (4, [V, M], ["When"]), (19, [V, M], ["How"]), (9, [V, M], ["Where"])]
    + [(5, [M], ["Where"])]
    + [(20, [V, S], []), (38, [V, A], []), (27, [V, ST], []), (33, [ST], [])]
    + [(6, [IRR], []), (26, [OT], [])]
)


def golden_store() -> tuple[list[ImageCaptionPair], list[AnnotationRecord]]:
    """The 200-pair hand-counted store described above."""
    pairs: list[ImageCaptionPair] = []
    records: list[AnnotationRecord] = []
    i = 0
    for count, relations, facets in _GOLDEN_BLOCKS:
        for _ in range(count):
            pid = f"golden:{i}"
            pairs.append(
                ImageCaptionPair(
                    pair_id=pid,
                    image_ref=f"http://pics.example/golden/{i}.jpg",
                    caption=f"golden caption {i}",
                    source_domain="pics.example",
                    origin=Origin.GROUND_TRUTH,
                )
            )
            records.append(
                AnnotationRecord(
                    pair_id=pid,
                    annotator_id="a1",
                    labels=RelationSet.of(relations, facets),
                    timestamp=i,
                )
            )
            i += 1
    assert i == 200
    return pairs, records


# ----------------------------------------------------------- desk-scale store
#
# 5000 ground-truth pairs: 1090 Other-only (545 Other-Text, 545
# Other-Gibberish) and 3910 with at least one primary relation, so
# excluding Other-only leaves 3910 = 3400 + 510 examples. The primary
# blocks are built so the single-label mapping is rule-deterministic
# (rules 1 and 2, or rule 3 on singletons) with mapped counts:
#
#   Visible 1825, Meta 916, Story 746, Subjective 276, Irrelevant 96,
#   Action 51   (sum 3910)
#
# i.e. 46.68 / 23.43 / 19.08 / 7.06 / 2.46 / 1.30 percent.

_DESK_MAPPED_COUNTS = {V: 1825, M: 916, ST: 746, S: 276, IRR: 96, A: 51}

_DESK_BLOCKS: list[tuple[int, list[CoherenceRelation], list[str], CoherenceRelation | None]] = [
    # (count, relations, facets, mapped label) -- mapped None = excluded
    (500, [V, M], ["How"], M),          # rule 1
    (250, [M], ["How", "Where"], M),    # rule 1
    (166, [M, ST], ["When"], M),        # rule 1
    (1500, [V], [], V),                 # singleton
    (325, [V, A], [], V),               # rule 2
    (746, [ST], [], ST),                # singleton
    (276, [S], [], S),                  # singleton
    (96, [IRR], [], IRR),               # singleton
    (51, [A], [], A),                   # singleton
    (545, [OT], [], None),
    (545, [OG], [], None),
]

_DESK_DOMAINS = ["photos.example", "stock.example", "news.example", "travel.example"]

_DESK_CAPTION_WORDS = {
    V: "a plain view of the scene",
    S: "what a beautiful scene this is",
    A: "someone is running through the scene",
    ST: "long ago this scene held a festival",
    M: "taken with a tripod at the scene",
    IRR: "completely unrelated text here",
    None: "xqzt vvkp aaeio",
}


@dataclass
class DeskStore:
    pairs: list[ImageCaptionPair]
    records: list[AnnotationRecord]
    mapped_counts: dict[CoherenceRelation, int] = field(default_factory=dict)

    def primary_pair_ids(self) -> list[str]:
        """Ids of pairs whose relation set has at least one primary member."""
        keep = []
        by_id = {r.pair_id: r for r in self.records}
        for p in self.pairs:
            if by_id[p.pair_id].labels.primary_relations():
                keep.append(p.pair_id)
        return keep


def desk_store(seed: int = 0) -> DeskStore:
    """5000-pair ground-truth store with the block structure above.

    The seed shuffles which pair id gets which block (and cosmetic
    domain assignment); the block counts, and therefore every corpus
    statistic, are identical for every seed.
    """
    assignments: list[tuple[list[CoherenceRelation], list[str]]] = []
    for count, relations, facets, _ in _DESK_BLOCKS:
        assignments.extend([(relations, facets)] * count)
    assert len(assignments) == 5000
    rng = random.Random(seed)
    rng.shuffle(assignments)

    pairs: list[ImageCaptionPair] = []
    records: list[AnnotationRecord] = []
    for i, (relations, facets) in enumerate(assignments):
        pid = f"desk:{i}"
        domain = _DESK_DOMAINS[rng.randrange(len(_DESK_DOMAINS))]
        rs = RelationSet.of(relations, facets)
        primaries = rs.primary_relations()
        base = _DESK_CAPTION_WORDS[primaries[0] if primaries else None]
        pairs.append(
            ImageCaptionPair(
                pair_id=pid,
                image_ref=f"http://{domain}/img/{i}.jpg",
                caption=f"{base} number {i}",
                source_domain=domain,
                origin=Origin.GROUND_TRUTH,
            )
        )
        records.append(
            AnnotationRecord(pair_id=pid, annotator_id="a1", labels=rs, timestamp=i)
        )
    return DeskStore(pairs=pairs, records=records, mapped_counts=dict(_DESK_MAPPED_COUNTS))


# ------------------------------------------------------------ caption corpora

_COLORS = ["red", "blue", "green", "tan"]
_ANIMALS = ["cat", "dog", "fox", "owl", "hen"]


def basis_image(i: int, dim: int = 64, scale: float = 8.0) -> np.ndarray:
    """Orthogonal image features: pair i activates coordinate i only."""
    vec = np.zeros(dim, dtype=np.float32)
    vec[i % dim] = scale
    return vec


@dataclass
class CaptionCorpusFixture:
    vocab: Vocab
    batches: list[CaptionerBatch]
    texts: list[str]


def memorization_corpus() -> CaptionCorpusFixture:
    """20 distinct captions over a tiny reusable word inventory.

    Every word occurs at least four times corpus-wide, so merge
    learning collapses each word to a single subtoken and targets stay
    short.
    """
    texts = [f"a {c} {a} rests" for c in _COLORS for a in _ANIMALS]
    vocab = build_vocab(texts, merges=60)
    batches = [
        CaptionerBatch(
            image_vec=basis_image(i),
            object_vecs=[],
            coherence_label=V,
            target_ids=vocab.encode(text),
        )
        for i, text in enumerate(texts)
    ]
    return CaptionCorpusFixture(vocab=vocab, batches=batches, texts=texts)


@dataclass
class ConditioningCorpus:
    vocab: Vocab
    batches: list[CaptionerBatch]
    n_images: int
    marker: str
    visible_texts: list[str]
    subjective_texts: list[str]


def conditioning_corpus(n_images: int = 20) -> ConditioningCorpus:
    """Paired corpus where only Subjective captions carry a marker word.

    Each image has a Visible caption without the marker and a
    Subjective caption with it, so a trained model's generations reveal
    whether the requested label actually steers the output.
    """
    combos = [(c, a) for c in _COLORS for a in _ANIMALS]
    if n_images > len(combos):
        raise ValueError(f"at most {len(combos)} images available")
    visible_texts = [f"a {c} {a} rests" for c, a in combos[:n_images]]
    subjective_texts = [f"a beautiful {c} {a}" for c, a in combos[:n_images]]
    vocab = build_vocab(visible_texts + subjective_texts, merges=80)
    batches: list[CaptionerBatch] = []
    for i in range(n_images):
        batches.append(
            CaptionerBatch(basis_image(i), [], V, vocab.encode(visible_texts[i]))
        )
        batches.append(
            CaptionerBatch(basis_image(i), [], S, vocab.encode(subjective_texts[i]))
        )
    return ConditioningCorpus(
        vocab=vocab,
        batches=batches,
        n_images=n_images,
        marker="beautiful",
        visible_texts=visible_texts,
        subjective_texts=subjective_texts,
    )


def classifier_fixture(n_per_class: int = 9, seed: int = 0):
    """Linearly separable annotated pairs: each relation's captions use
    its own word inventory, so an n-gram model can reach perfect F1."""
    rng = random.Random(seed)
    fillers = ["one", "two", "three", "four", "five", "six", "seven"]
    pairs: list[ImageCaptionPair] = []
    records: list[AnnotationRecord] = []
    i = 0
    for rel, base in [(r, _DESK_CAPTION_WORDS[r]) for r in (V, S, A, ST, M, IRR)]:
        for _ in range(n_per_class):
            pid = f"clf:{i}"
            filler = fillers[rng.randrange(len(fillers))]
            pairs.append(
                ImageCaptionPair(
                    pair_id=pid,
                    image_ref=f"http://pics.example/clf/{i}.jpg",
                    caption=f"{base} {filler}",
                    source_domain="pics.example",
                )
            )
            facets = ["How"] if rel is M else []
            records.append(
                AnnotationRecord(
                    pair_id=pid, annotator_id="a1", labels=RelationSet.of([rel], facets)
                )
            )
            i += 1
    return pairs, records

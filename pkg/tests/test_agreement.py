import random

import pytest

from cohcap.core import AnnotationRecord, CoherenceRelation, PRIMARY_RELATIONS, RelationSet
from cohcap.evaluate.agreement import (
    AgreementReport,
    CoverageMismatchError,
    agreement_summary,
    cohen_kappa,
    kappa_from_flags,
)


def records_from_flags(annotator, flags, label=CoherenceRelation.VISIBLE):
    # pairs flagged True carry `label`; the rest carry Story as filler
    out = []
    for i, flag in enumerate(flags):
        rels = [label.value] if flag else ["Story"]
        out.append(
            AnnotationRecord(
                pair_id=f"p{i}", annotator_id=annotator, labels=RelationSet.of(rels)
            )
        )
    return out


def test_hand_worked_2x2_table():
    # a=45 both yes, b=5 A-only, c=5 B-only, d=45 both no (N=100)
    # p_o = 90/100, marginals 50/50 each side -> p_e = 0.5, kappa = 0.8
    flags_a = [True] * 45 + [True] * 5 + [False] * 5 + [False] * 45
    flags_b = [True] * 45 + [False] * 5 + [True] * 5 + [False] * 45
    rep = kappa_from_flags(flags_a, flags_b)
    assert rep.p_observed == pytest.approx(0.90, abs=1e-12)
    assert rep.p_expected == pytest.approx(0.50, abs=1e-12)
    assert rep.kappa == pytest.approx(0.80, abs=1e-9)


def test_identical_annotations_kappa_one():
    flags = [True, False, True, True, False]
    rep = kappa_from_flags(flags, flags)
    assert rep.kappa == pytest.approx(1.0, abs=1e-12)

    recs = records_from_flags("a", flags)
    recs_b = records_from_flags("b", flags)
    assert cohen_kappa(recs, recs_b, CoherenceRelation.VISIBLE).kappa == pytest.approx(1.0)
    summary = agreement_summary(recs, recs_b)
    assert summary.mean_kappa == pytest.approx(1.0)


def test_degenerate_constant_tables_flagged():
    rep = kappa_from_flags([True] * 4, [True] * 4)
    assert rep.degenerate and rep.kappa is None


def test_annotator_swap_symmetry_on_random_stores():
    rng = random.Random(1234)
    for _ in range(50):
        n = rng.randrange(5, 40)
        flags_a = [rng.random() < 0.6 for _ in range(n)]
        flags_b = [rng.random() < 0.4 for _ in range(n)]
        ab = kappa_from_flags(flags_a, flags_b)
        ba = kappa_from_flags(flags_b, flags_a)
        if ab.kappa is None:
            assert ba.kappa is None
        else:
            assert ab.kappa == pytest.approx(ba.kappa, abs=1e-12)


def test_independent_random_labels_kappa_near_zero():
    rng = random.Random(77)
    trials, n = 200, 400
    kappas = []
    for _ in range(trials):
        flags_a = [rng.random() < 0.5 for _ in range(n)]
        flags_b = [rng.random() < 0.5 for _ in range(n)]
        rep = kappa_from_flags(flags_a, flags_b)
        assert rep.kappa is not None
        kappas.append(rep.kappa)
    mean = sum(kappas) / trials
    var = sum((k - mean) ** 2 for k in kappas) / (trials - 1)
    stderr = (var / trials) ** 0.5
    assert abs(mean) <= 3 * stderr + 1e-9


def test_kappa_one_iff_full_observed_agreement():
    flags_a = [True, False, True]
    flags_b = [True, False, False]
    rep = kappa_from_flags(flags_a, flags_b)
    assert rep.p_observed < 1 and rep.kappa is not None and rep.kappa < 1


def test_coverage_mismatch():
    recs_a = records_from_flags("a", [True, False])
    recs_b = records_from_flags("b", [True, False, True])
    with pytest.raises(CoverageMismatchError):
        cohen_kappa(recs_a, recs_b, CoherenceRelation.VISIBLE)


def test_multilabel_per_label_summary():
    rs_a = [
        RelationSet.of(["Visible", "Meta"], ["Where"]),
        RelationSet.of(["Story"]),
        RelationSet.of(["Visible"]),
    ]
    rs_b = [
        RelationSet.of(["Visible"]),
        RelationSet.of(["Story"]),
        RelationSet.of(["Visible"]),
    ]
    recs_a = [
        AnnotationRecord(pair_id=f"p{i}", annotator_id="a", labels=rs)
        for i, rs in enumerate(rs_a)
    ]
    recs_b = [
        AnnotationRecord(pair_id=f"p{i}", annotator_id="b", labels=rs)
        for i, rs in enumerate(rs_b)
    ]
    summary = agreement_summary(recs_a, recs_b)
    assert summary.per_label["Visible"].kappa == pytest.approx(1.0)
    assert summary.per_label["Story"].kappa == pytest.approx(1.0)
    # Meta: A flagged one pair, B none -> p_o = 2/3
    meta = summary.per_label["Meta"]
    assert meta.p_observed == pytest.approx(2 / 3)
    assert isinstance(meta, AgreementReport)

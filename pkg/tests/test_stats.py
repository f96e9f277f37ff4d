"""Distribution, overlap, and report-emission tests on small hand-counted
corpora where every percentage can be verified by eye.
"""

import json

import pytest

from cohcap.core import (
    AnnotationRecord,
    CoherenceRelation,
    ImageCaptionPair,
    Origin,
    RelationSet,
)
from cohcap.evaluate.figures import render_figures, render_figures_from_plotdata
from cohcap.evaluate.report import distribution_table, emit_report, overlap_table
from cohcap.evaluate.stats import (
    UnknownPairError,
    genre_distribution,
    overlap_rate,
    relation_distribution,
    union_labels,
)

V = CoherenceRelation.VISIBLE
M = CoherenceRelation.META
S = CoherenceRelation.STORY
IRR = CoherenceRelation.IRRELEVANT


def pair(pid, domain="blog.example", origin=Origin.GROUND_TRUTH):
    return ImageCaptionPair(
        pair_id=pid,
        image_ref=f"http://{domain}/{pid}.jpg",
        caption=f"caption {pid}",
        source_domain=domain,
        origin=origin,
    )


def rec(pid, annotator, rels, facets=()):
    return AnnotationRecord(
        pair_id=pid,
        annotator_id=annotator,
        labels=RelationSet.of(rels, facets),
    )


# four pairs: p1 {Visible, Meta/When}, p2 {Visible}, p3 {Meta}, p4 {Story}
PAIRS = [pair("p1"), pair("p2"), pair("p3"), pair("p4")]
ANNOTATIONS = [
    rec("p1", "a1", [V, M], ["When"]),
    rec("p2", "a1", [V]),
    rec("p3", "a1", [M]),
    rec("p4", "a1", [S]),
]


def test_union_labels_merges_annotators():
    merged = union_labels(
        [
            rec("p1", "a1", [V]),
            rec("p1", "a2", [M], ["How"]),
        ]
    )
    rels, facets = merged["p1"]
    assert rels == {V, M}
    assert {f.value for f in facets} == {"How"}


def test_distribution_hand_counts():
    report = relation_distribution(ANNOTATIONS, PAIRS)
    g = report.group("all")
    assert g.n_pairs == 4
    assert g.label_pct["Visible"] == pytest.approx(50.0)
    assert g.label_pct["Meta"] == pytest.approx(50.0)
    assert g.label_pct["Story"] == pytest.approx(25.0)
    assert g.label_pct["Irrelevant"] == 0.0
    # facet percentages are conditioned on the two Meta pairs
    assert g.n_meta_pairs == 2
    assert g.facet_pct["When"] == pytest.approx(50.0)
    assert g.facet_pct["How"] == 0.0


def test_distribution_denominator_is_annotated_pairs():
    # p4 never annotated: it must not dilute the percentages
    report = relation_distribution(ANNOTATIONS[:3], PAIRS)
    g = report.group("all")
    assert g.n_pairs == 3
    assert g.label_pct["Visible"] == pytest.approx(100.0 * 2 / 3)


def test_distribution_unknown_pair_raises():
    with pytest.raises(UnknownPairError):
        relation_distribution([rec("ghost", "a1", [V])], PAIRS)


def test_distribution_group_by_origin():
    pairs = [pair("p1"), pair("p2", origin=Origin.MODEL_OUTPUT)]
    anns = [rec("p1", "a1", [V]), rec("p2", "a1", [S])]
    report = relation_distribution(anns, pairs, group_by="origin")
    assert {g.group for g in report.groups} == {"GroundTruth", "ModelOutput"}
    assert report.group("GroundTruth").label_pct["Visible"] == pytest.approx(100.0)
    assert report.group("ModelOutput").label_pct["Story"] == pytest.approx(100.0)


def test_distribution_group_by_unknown_key_rejected():
    with pytest.raises(ValueError):
        relation_distribution(ANNOTATIONS, PAIRS, group_by="caption_length")


def test_overlap_conventions():
    rate_all = overlap_rate(ANNOTATIONS, V, M)
    assert rate_all.convention == "all"
    assert rate_all.n_both == 1
    assert rate_all.n_denominator == 4
    assert rate_all.percent == pytest.approx(25.0)

    rate_a = overlap_rate(ANNOTATIONS, V, M, denominator="a")
    assert rate_a.n_denominator == 2
    assert rate_a.percent == pytest.approx(50.0)

    rate_b = overlap_rate(ANNOTATIONS, V, M, denominator="b")
    assert rate_b.percent == pytest.approx(50.0)


def test_overlap_undefined_when_denominator_empty():
    rate = overlap_rate(ANNOTATIONS, V, IRR, denominator="b")
    assert rate.percent is None
    assert rate.undefined


def test_overlap_pair_filter():
    rate = overlap_rate(ANNOTATIONS, V, M, pair_ids={"p1"})
    assert rate.n_both == 1
    assert rate.n_denominator == 1
    assert rate.percent == pytest.approx(100.0)


def test_overlap_rejects_unknown_convention():
    with pytest.raises(ValueError):
        overlap_rate(ANNOTATIONS, V, M, denominator="union")


def test_genre_distribution_orders_by_size_then_name():
    pairs = [
        pair("p1", domain="blog.example"),
        pair("p2", domain="blog.example"),
        pair("p3", domain="news.example"),
        pair("p4", domain="art.example"),
    ]
    report = genre_distribution(ANNOTATIONS, pairs)
    assert [g.group for g in report.groups] == ["blog.example", "art.example", "news.example"]
    top = genre_distribution(ANNOTATIONS, pairs, top=2)
    assert [g.group for g in top.groups] == ["blog.example", "art.example"]


def test_report_emission_round_trip(tmp_path):
    report = relation_distribution(ANNOTATIONS, PAIRS)
    table = distribution_table(report, "label_distribution")
    written = emit_report([table], tmp_path)
    names = {p.name for p in written}
    assert names == {"label_distribution.csv", "report.md", "plotdata.json"}

    csv_lines = (tmp_path / "label_distribution.csv").read_text().splitlines()
    assert len(csv_lines) == 2  # header + one group
    header = csv_lines[0].split(",")
    row = csv_lines[1].split(",")
    assert float(row[header.index("Visible")]) == pytest.approx(50.0)
    assert row[header.index("group")] == "all"
    assert int(row[header.index("n_meta_pairs")]) == 2

    payload = json.loads((tmp_path / "plotdata.json").read_text())
    assert payload["tables"][0]["name"] == "label_distribution"

    md = (tmp_path / "report.md").read_text()
    assert "## label_distribution" in md
    assert "| 50.00 |" in md


def test_report_emission_byte_identical(tmp_path):
    report = relation_distribution(ANNOTATIONS, PAIRS)
    tables = [
        distribution_table(report, "label_distribution"),
        overlap_table([overlap_rate(ANNOTATIONS, V, M)], "overlap"),
    ]
    first = tmp_path / "run1"
    second = tmp_path / "run2"
    emit_report(tables, first)
    emit_report(tables, second)
    for name in ("label_distribution.csv", "overlap.csv", "report.md", "plotdata.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_report_emission_empty_writes_nothing(tmp_path):
    assert emit_report([], tmp_path / "out") == []
    assert not (tmp_path / "out").exists()


def test_overlap_table_spells_out_undefined():
    rate = overlap_rate(ANNOTATIONS, V, IRR, denominator="b")
    table = overlap_table([rate], "overlap")
    assert table.rows[0][-1] == "undefined"


def test_figures_render_for_distribution_tables(tmp_path):
    report = relation_distribution(ANNOTATIONS, PAIRS)
    tables = [
        distribution_table(report, "label_distribution"),
        overlap_table([overlap_rate(ANNOTATIONS, V, M)], "overlap"),
    ]
    written = render_figures(tables, tmp_path)
    # only the distribution-shaped table becomes a figure
    assert [p.name for p in written] == ["label_distribution.png"]
    assert written[0].stat().st_size > 0


def test_figures_byte_identical_and_loadable_from_plotdata(tmp_path):
    report = relation_distribution(ANNOTATIONS, PAIRS)
    tables = [distribution_table(report, "label_distribution")]
    emit_report(tables, tmp_path / "report", formats=("plotdata-json",))

    direct = render_figures(tables, tmp_path / "fig1")
    via_json = render_figures_from_plotdata(tmp_path / "report" / "plotdata.json", tmp_path / "fig2")
    assert direct[0].read_bytes() == via_json[0].read_bytes()

"""CIDEr tests against hand-worked tf-idf arithmetic.

Corpus A (2 slots, 1 reference each):
  refs:  ["a brown cat"], ["a red dog"]   candidates: "a brown dog", "a red dog"
  df: "a" appears in both reference docs -> idf = ln2 - ln2 = 0;
  every other n-gram appears in one doc -> idf = ln2.
  Candidate 1 vs ref 1: unigram cosine = ln2^2 / (ln2*sqrt2)^2 = 1/2
  ("brown" matches; "a" weightless; "dog"/"cat" differ), bigram cosine =
  1/2 ("a brown" matches), tri/4-gram 0 -> 10 * (1/2+1/2+0+0)/4 = 2.5.
  Candidate 2 is its reference: cosines 1,1,1,0 -> 7.5; corpus (2.5+7.5)/2.

Corpus B (3 slots) exercises unequal idf weights:
  refs: ["red cat"], ["red dog"], ["blue bird"]; candidate 1 = "red dog".
  idf("red") = ln(3/2) =: r, idf("cat") = idf("dog") = ln3 =: s.
  Slot 1 unigram cosine = r^2/(r^2+s^2), no shared bigram ->
  score = 10 * (r^2/(r^2+s^2))/4 = 0.2997080326599727 (12 digits).
"""

import math

import pytest

from cohcap.evaluate.cider import EmptyReferenceError, cider_score, ngram_counts, tokenize


def test_ngram_counts():
    counts = ngram_counts(["a", "b", "a"], n_max=2)
    assert counts[("a",)] == 2
    assert counts[("b",)] == 1
    assert counts[("a", "b")] == 1
    assert counts[("b", "a")] == 1


def test_hand_worked_corpus_a():
    result = cider_score(
        ["a brown dog", "a red dog"],
        [["a brown cat"], ["a red dog"]],
    )
    assert result.per_example[0] == pytest.approx(2.5, abs=1e-6)
    assert result.per_example[1] == pytest.approx(7.5, abs=1e-6)
    assert result.corpus_score == pytest.approx(5.0, abs=1e-6)


def test_hand_worked_corpus_b_unequal_idf():
    result = cider_score(
        ["red dog", "red dog", "blue bird"],
        [["red cat"], ["red dog"], ["blue bird"]],
    )
    r = math.log(3 / 2)
    s = math.log(3)
    expected_slot1 = 10 * (r * r / (r * r + s * s)) / 4
    assert expected_slot1 == pytest.approx(0.2997080326599727, abs=1e-12)
    assert result.per_example[0] == pytest.approx(expected_slot1, abs=1e-6)
    # slot 2 identical two-token pair: cosines 1,1,0,0
    assert result.per_example[1] == pytest.approx(5.0, abs=1e-6)


def test_identical_candidate_four_tokens_scores_ten():
    # with >= 4 tokens all four n-gram orders are populated, so an exact
    # match against the sole reference reaches the 10.0 ceiling
    result = cider_score(
        ["the cat sat down", "a dog ran away"],
        [["the cat sat down"], ["a dog ran away"]],
    )
    assert result.per_example[0] == pytest.approx(10.0, abs=1e-9)
    assert result.per_example[1] == pytest.approx(10.0, abs=1e-9)


def test_disjoint_ngrams_score_zero():
    result = cider_score(
        ["purple elephant flies"],
        [["a red dog runs", "a brown cat sits"]],
    )
    assert result.per_example[0] == 0.0


def test_empty_reference_error():
    with pytest.raises(EmptyReferenceError):
        cider_score(["a dog"], [[]])
    with pytest.raises(EmptyReferenceError):
        cider_score([], [])


def test_deterministic():
    args = (["a brown dog", "a red dog"], [["a brown cat"], ["a red dog"]])
    assert cider_score(*args).per_example == cider_score(*args).per_example


def test_tokenize_lowercases():
    assert tokenize("A Brown DOG") == ["a", "brown", "dog"]


def test_cider_d_variant_penalizes_length_difference():
    base = cider_score(
        ["a red dog", "x"],
        [["a red dog plays in the park"], ["y"]],
        variant="cider",
    )
    dvar = cider_score(
        ["a red dog", "x"],
        [["a red dog plays in the park"], ["y"]],
        variant="cider-d",
    )
    assert dvar.per_example[0] < base.per_example[0]


def test_self_similarity_maximal_for_fixed_length():
    # among same-length candidates, the reference itself scores highest
    refs = [["the cat sat down"], ["a dog ran away"]]
    exact = cider_score(["the cat sat down", "a dog ran away"], refs)
    off = cider_score(["the cat sat away", "a dog ran away"], refs)
    assert exact.per_example[0] > off.per_example[0]

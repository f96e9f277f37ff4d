"""Consensus-based caption scoring (CIDEr).

Each sentence becomes a set of tf-idf-weighted n-gram vectors for
n = 1..4; a candidate is scored by cosine similarity against each of its
references, averaged over references and over n, then scaled by 10.
Document frequency is counted over the reference corpus: an n-gram's df
is the number of candidate slots whose reference set mentions it, and
idf = log(N) - log(max(1, df)) for N slots.

The default variant is the plain cosine form. The "cider-d" variant adds
the defensive tweaks used for optimization: candidate counts clipped to
the reference count, and a Gaussian penalty on the length difference.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Sequence


class EmptyReferenceError(ValueError):
    pass


@dataclass
class CiderResult:
    corpus_score: float
    per_example: list[float]


def tokenize(sentence: str) -> list[str]:
    """Lowercased whitespace tokenization; callers pre-clean punctuation."""
    return sentence.lower().split()


def ngram_counts(tokens: Sequence[str], n_max: int = 4) -> Counter:
    counts: Counter = Counter()
    for n in range(1, n_max + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def _document_frequency(cooked_refs: list[list[Counter]]) -> dict:
    df: dict = defaultdict(float)
    for refs in cooked_refs:
        for ngram in {ng for ref in refs for ng in ref}:
            df[ngram] += 1
    return df


def _tfidf_vec(
    counts: Counter, df: dict, log_n: float, n_max: int
) -> tuple[list[dict], list[float], int]:
    """Per-n tf-idf vectors, their norms, and the unigram length."""
    vec: list[dict] = [defaultdict(float) for _ in range(n_max)]
    norm = [0.0] * n_max
    length = 0
    for ngram, term_freq in counts.items():
        idf = log_n - math.log(max(1.0, df[ngram]))
        n = len(ngram) - 1
        vec[n][ngram] = term_freq * idf
        norm[n] += vec[n][ngram] ** 2
        if n == 0:
            length += term_freq
    return vec, [math.sqrt(x) for x in norm], length


def cider_score(
    candidates: Sequence[str],
    references: Sequence[Sequence[str]],
    n_max: int = 4,
    variant: str = "cider",
    sigma: float = 6.0,
) -> CiderResult:
    """Score each candidate against its references; deterministic.

    ``candidates[i]`` is scored against ``references[i]`` (one or more
    sentences). The corpus score is the mean per-example score.
    """
    if variant not in ("cider", "cider-d"):
        raise ValueError(f"unknown variant {variant!r}")
    if len(candidates) != len(references):
        raise ValueError("candidates and references must align one-to-one")
    if not candidates:
        raise EmptyReferenceError("no candidates to score")
    for i, refs in enumerate(references):
        if not refs:
            raise EmptyReferenceError(f"candidate {i} has no references")

    cooked_refs = [[ngram_counts(tokenize(r), n_max) for r in refs] for refs in references]
    cooked_cands = [ngram_counts(tokenize(c), n_max) for c in candidates]
    df = _document_frequency(cooked_refs)
    log_n = math.log(max(1.0, len(cooked_refs)))

    per_example: list[float] = []
    for cand_counts, refs in zip(cooked_cands, cooked_refs):
        cand_vec, cand_norm, cand_len = _tfidf_vec(cand_counts, df, log_n, n_max)
        score_n = [0.0] * n_max
        for ref_counts in refs:
            ref_vec, ref_norm, ref_len = _tfidf_vec(ref_counts, df, log_n, n_max)
            for n in range(n_max):
                dot = 0.0
                for ngram, w in cand_vec[n].items():
                    if variant == "cider-d":
                        dot += min(w, ref_vec[n][ngram]) * ref_vec[n][ngram]
                    else:
                        dot += w * ref_vec[n][ngram]
                if cand_norm[n] != 0.0 and ref_norm[n] != 0.0:
                    dot /= cand_norm[n] * ref_norm[n]
                else:
                    dot = 0.0
                if variant == "cider-d":
                    delta = float(cand_len - ref_len)
                    dot *= math.exp(-(delta**2) / (2 * sigma**2))
                score_n[n] += dot
        mean_over_n = sum(score_n) / n_max
        per_example.append(10.0 * mean_over_n / len(refs))
    return CiderResult(
        corpus_score=sum(per_example) / len(per_example),
        per_example=per_example,
    )

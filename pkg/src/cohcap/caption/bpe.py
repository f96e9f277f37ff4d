"""Byte-pair subtokenizer with reserved control and label tokens.

Words end in an explicit ``</w>`` marker symbol so detokenization can
restore word boundaries. Merge learning is deterministic: the most
frequent adjacent symbol pair wins each round, ties broken by the
lexicographically largest pair, so the same corpus always yields the
same vocabulary.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from ..core import CoherenceRelation, PRIMARY_RELATIONS

WORD_END = "</w>"

PAD = "<pad>"
EOS = "<eos>"
UNK = "<unk>"
NONE_LABEL = "<none>"


def label_token(relation: CoherenceRelation | None) -> str:
    """Control-token spelling for a coherence label (None -> agnostic)."""
    if relation is None:
        return NONE_LABEL
    return f"<{relation.value.lower()}>"


#: ids 0..9 are fixed: pad, eos, unk, six relation labels, agnostic marker
RESERVED_TOKENS: tuple[str, ...] = (
    PAD,
    EOS,
    UNK,
    *[label_token(rel) for rel in PRIMARY_RELATIONS],
    NONE_LABEL,
)

PAD_ID = RESERVED_TOKENS.index(PAD)
EOS_ID = RESERVED_TOKENS.index(EOS)
UNK_ID = RESERVED_TOKENS.index(UNK)


class EmptyCorpusError(ValueError):
    pass


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word) + (WORD_END,)


def _pair_counts(words: dict[tuple[str, ...], int]) -> Counter:
    counts: Counter = Counter()
    for symbols, freq in words.items():
        for a, b in zip(symbols, symbols[1:]):
            counts[(a, b)] += freq
    return counts


def _merge_word(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    merged: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == pair:
            merged.append(symbols[i] + symbols[i + 1])
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return tuple(merged)


@dataclass
class Vocab:
    """Subtoken <-> id bijection plus the ordered merge list."""

    id_of: dict[str, int]
    merges: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.token_of = {i: t for t, i in self.id_of.items()}
        if len(self.token_of) != len(self.id_of):
            raise ValueError("vocabulary mapping is not a bijection")
        self._merge_rank = {pair: r for r, pair in enumerate(self.merges)}

    def __len__(self) -> int:
        return len(self.id_of)

    def label_id(self, relation: CoherenceRelation | None) -> int:
        return self.id_of[label_token(relation)]

    def _apply_merges(self, symbols: tuple[str, ...]) -> tuple[str, ...]:
        # repeatedly apply the earliest-learned merge present in the word
        while len(symbols) > 1:
            ranked = [
                (self._merge_rank[p], p)
                for p in zip(symbols, symbols[1:])
                if p in self._merge_rank
            ]
            if not ranked:
                break
            _, best = min(ranked)
            symbols = _merge_word(symbols, best)
        return symbols

    def encode_word(self, word: str) -> list[int]:
        symbols = self._apply_merges(_word_symbols(word))
        return [self.id_of.get(s, UNK_ID) for s in symbols]

    def encode(self, text: str, add_eos: bool = True) -> list[int]:
        ids: list[int] = []
        for word in text.lower().split():
            ids.extend(self.encode_word(word))
        if add_eos:
            ids.append(EOS_ID)
        return ids

    def decode(self, ids: list[int]) -> str:
        parts: list[str] = []
        for i in ids:
            token = self.token_of.get(i, UNK)
            if token in (PAD, EOS):
                continue
            parts.append(token)
        return "".join(parts).replace(WORD_END, " ").strip()

    def to_dict(self) -> dict:
        tokens = [self.token_of[i] for i in range(len(self.token_of))]
        return {"tokens": tokens, "merges": [list(p) for p in self.merges]}

    @classmethod
    def from_dict(cls, payload: dict) -> "Vocab":
        id_of = {t: i for i, t in enumerate(payload["tokens"])}
        merges = [tuple(p) for p in payload["merges"]]
        return cls(id_of=id_of, merges=merges)


def build_vocab(captions: list[str], merges: int = 200) -> Vocab:
    """Learn a BPE vocabulary from a caption corpus.

    Final size = reserved tokens + base characters (with the word-end
    marker) + at most ``merges`` merged symbols.
    """
    words: dict[tuple[str, ...], int] = {}
    for caption in captions:
        for word in caption.lower().split():
            key = _word_symbols(word)
            words[key] = words.get(key, 0) + 1
    if not words:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")

    base = sorted({s for symbols in words for s in symbols})
    learned: list[tuple[str, str]] = []
    for _ in range(merges):
        counts = _pair_counts(words)
        if not counts:
            break
        # max by count; count ties go to the lexicographically largest pair,
        # which favors letter pairs over pairs ending in the word marker
        best, best_count = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
        if best_count < 2:
            break  # singleton merges add nothing reusable
        learned.append(best)
        words = {_merge_word(symbols, best): freq for symbols, freq in words.items()}

    id_of = {t: i for i, t in enumerate(RESERVED_TOKENS)}
    for symbol in base:
        if symbol not in id_of:
            id_of[symbol] = len(id_of)
    for a, b in learned:
        merged = a + b
        if merged not in id_of:
            id_of[merged] = len(id_of)
    return Vocab(id_of=id_of, merges=learned)

"""Text and image encoders feeding the fusion classifier.

Three text adapters (n-gram counts, a recurrent embedding module, and a
precomputed-feature lookup) and two image adapters (precomputed lookup
and a content-hash fixture encoder) share one protocol: encode a pair to
a fixed-width float vector, deterministically.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from ..core import ImageCaptionPair
from ..corpus import FeatureTable, MissingFeatureError

#: index reserved for n-grams unseen at fit time
UNK_BUCKET = 0


class EncoderNotFittedError(RuntimeError):
    pass


def tokenize_caption(caption: str) -> list[str]:
    return caption.lower().split()


def caption_ngrams(tokens: list[str], n_min: int, n_max: int) -> list[tuple[str, ...]]:
    grams: list[tuple[str, ...]] = []
    for n in range(n_min, n_max + 1):
        for i in range(len(tokens) - n + 1):
            grams.append(tuple(tokens[i : i + n]))
    return grams


@dataclass(frozen=True)
class TextEncoderSpec:
    """Which text adapter to use and its shape parameters.

    ``vocab_size`` caps the fitted vocabulary of the n-gram encoder (the
    unknown bucket is extra); ``embedding_dim``/``hidden_dim`` size the
    recurrent module; ``feature_path`` names the file for precomputed
    lookups.
    """

    kind: str  # ngram_bow | recurrent_embedding | precomputed
    ngram_min: int = 1
    ngram_max: int = 5
    vocab_size: int = 5000
    embedding_dim: int = 64
    hidden_dim: int = 512
    feature_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("ngram_bow", "recurrent_embedding", "precomputed"):
            raise ValueError(f"unknown text encoder kind {self.kind!r}")
        if not (1 <= self.ngram_min <= self.ngram_max):
            raise ValueError("n-gram range must satisfy 1 <= min <= max")


@dataclass(frozen=True)
class ImageEncoderSpec:
    kind: str  # precomputed | fixture_hash
    output_dim: int = 64
    feature_path: str | None = None

    def __post_init__(self):
        if self.kind not in ("precomputed", "fixture_hash"):
            raise ValueError(f"unknown image encoder kind {self.kind!r}")
        if self.output_dim <= 0:
            raise ValueError("output_dim must be positive")


class NgramBowEncoder:
    """Counts of the most frequent training n-grams, plus an unknown bucket.

    Vocabulary is fit on training captions only; at encode time any
    n-gram outside it lands in the shared unknown bucket at index 0, so
    out-of-vocabulary input is never an error.
    """

    def __init__(self, spec: TextEncoderSpec):
        self.spec = spec
        self._index: dict[tuple[str, ...], int] | None = None

    def fit(self, captions: list[str]) -> "NgramBowEncoder":
        counts: Counter = Counter()
        for caption in captions:
            counts.update(caption_ngrams(tokenize_caption(caption), self.spec.ngram_min, self.spec.ngram_max))
        # most frequent first; ties broken lexically so refits are stable
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        kept = [gram for gram, _ in ranked[: self.spec.vocab_size]]
        self._index = {gram: UNK_BUCKET + 1 + i for i, gram in enumerate(kept)}
        return self

    @property
    def output_dim(self) -> int:
        if self._index is None:
            raise EncoderNotFittedError("fit() the n-gram vocabulary before encoding")
        return len(self._index) + 1

    @property
    def vocabulary(self) -> list[str]:
        """Fitted n-grams as space-joined strings, in index order."""
        if self._index is None:
            raise EncoderNotFittedError("fit() the n-gram vocabulary before encoding")
        return [" ".join(gram) for gram, _ in sorted(self._index.items(), key=lambda kv: kv[1])]

    @classmethod
    def from_vocabulary(cls, spec: TextEncoderSpec, vocabulary: list[str]) -> "NgramBowEncoder":
        enc = cls(spec)
        enc._index = {tuple(text.split(" ")): UNK_BUCKET + 1 + i for i, text in enumerate(vocabulary)}
        return enc

    def encode(self, caption: str) -> np.ndarray:
        if self._index is None:
            raise EncoderNotFittedError("fit() the n-gram vocabulary before encoding")
        vec = np.zeros(self.output_dim, dtype=np.float32)
        for gram in caption_ngrams(tokenize_caption(caption), self.spec.ngram_min, self.spec.ngram_max):
            vec[self._index.get(gram, UNK_BUCKET)] += 1.0
        return vec

    def encode_pair(self, pair: ImageCaptionPair) -> np.ndarray:
        return self.encode(pair.caption)


class RecurrentTextModule(nn.Module):
    """Embedding -> LSTM -> BatchNorm -> dense -> tanh over subword-free tokens."""

    def __init__(self, vocab_size: int, embedding_dim: int, hidden_dim: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, embedding_dim, padding_idx=0)
        self.lstm = nn.LSTM(embedding_dim, hidden_dim, batch_first=True)
        self.norm = nn.BatchNorm1d(hidden_dim)
        self.dense = nn.Linear(hidden_dim, hidden_dim)

    def forward(self, token_ids: torch.Tensor) -> torch.Tensor:
        emb = self.embed(token_ids)
        _, (h_n, _) = self.lstm(emb)
        return torch.tanh(self.dense(self.norm(h_n[-1])))


class RecurrentTextEncoder:
    """Deterministic sentence vectors from a seeded recurrent module.

    The module is trainable in principle; here it is frozen after seeded
    initialization and run in eval mode, which keeps encoding a pure
    function of (spec, caption) and lets the classifier below it carry
    all the learning.
    """

    def __init__(self, spec: TextEncoderSpec):
        self.spec = spec
        self._token_index: dict[str, int] | None = None
        self._module: RecurrentTextModule | None = None

    def fit(self, captions: list[str]) -> "RecurrentTextEncoder":
        tokens = sorted({t for c in captions for t in tokenize_caption(c)})
        # 0 = padding, 1 = unknown
        self._token_index = {t: i + 2 for i, t in enumerate(tokens)}
        with torch.random.fork_rng():
            torch.manual_seed(self.spec.seed)
            self._module = RecurrentTextModule(
                vocab_size=len(self._token_index) + 2,
                embedding_dim=self.spec.embedding_dim,
                hidden_dim=self.spec.hidden_dim,
            )
        self._module.eval()
        return self

    @property
    def output_dim(self) -> int:
        if self._module is None:
            raise EncoderNotFittedError("fit() the recurrent encoder before encoding")
        return self.spec.hidden_dim

    def encode(self, caption: str) -> np.ndarray:
        if self._module is None or self._token_index is None:
            raise EncoderNotFittedError("fit() the recurrent encoder before encoding")
        ids = [self._token_index.get(t, 1) for t in tokenize_caption(caption)] or [1]
        with torch.no_grad():
            out = self._module(torch.tensor([ids], dtype=torch.long))
        return out[0].numpy().astype(np.float32)

    def encode_pair(self, pair: ImageCaptionPair) -> np.ndarray:
        return self.encode(pair.caption)


@dataclass
class PrecomputedTextEncoder:
    """Looks text vectors up in a feature file keyed by pair id."""

    table: FeatureTable
    expected_dim: int | None = None

    @property
    def output_dim(self) -> int:
        if self.expected_dim is not None:
            return self.expected_dim
        if not self.table.text_vecs:
            raise MissingFeatureError("feature table holds no text vectors")
        return len(next(iter(self.table.text_vecs.values())))

    def encode_pair(self, pair: ImageCaptionPair) -> np.ndarray:
        vec = np.asarray(self.table.text_vec(pair.pair_id), dtype=np.float32)
        if self.expected_dim is not None and vec.shape[0] != self.expected_dim:
            raise MissingFeatureError(
                f"text features for {pair.pair_id!r} have dim {vec.shape[0]}, expected {self.expected_dim}"
            )
        return vec


def hash_vector(data: bytes, dim: int) -> np.ndarray:
    """Unit-norm pseudo-random vector seeded by the content hash of ``data``."""
    seed = int.from_bytes(hashlib.sha256(data).digest()[:8], "big")
    vec = np.random.default_rng(seed).standard_normal(dim)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:  # standard_normal of dim >= 1 is never exactly zero, but stay safe
        vec[0] = 1.0
        norm = 1.0
    return (vec / norm).astype(np.float32)


class FixtureHashImageEncoder:
    """Deterministic stand-in for a pretrained image network.

    Maps image bytes to a unit-norm vector seeded by their hash; the
    ``loader`` turns a pair into bytes (e.g. by reading a fixture file).
    Without a loader the image reference string itself is hashed, which
    keeps text-plus-image runs possible when no image files exist.
    """

    def __init__(self, spec: ImageEncoderSpec, loader=None):
        self.spec = spec
        self.loader = loader

    @property
    def output_dim(self) -> int:
        return self.spec.output_dim

    def encode_bytes(self, data: bytes) -> np.ndarray:
        return hash_vector(data, self.spec.output_dim)

    def encode_pair(self, pair: ImageCaptionPair) -> np.ndarray:
        if self.loader is not None:
            return self.encode_bytes(self.loader(pair))
        return self.encode_bytes(pair.image_ref.encode("utf-8"))


@dataclass
class PrecomputedImageEncoder:
    table: FeatureTable
    expected_dim: int | None = None

    @property
    def output_dim(self) -> int:
        if self.expected_dim is not None:
            return self.expected_dim
        if not self.table.image_vecs:
            raise MissingFeatureError("feature table holds no image vectors")
        return len(next(iter(self.table.image_vecs.values())))

    def encode_pair(self, pair: ImageCaptionPair) -> np.ndarray:
        vec = np.asarray(self.table.image_vec(pair.pair_id), dtype=np.float32)
        if self.expected_dim is not None and vec.shape[0] != self.expected_dim:
            raise MissingFeatureError(
                f"image features for {pair.pair_id!r} have dim {vec.shape[0]}, expected {self.expected_dim}"
            )
        return vec


def build_text_encoder(
    spec: TextEncoderSpec,
    train_captions: list[str] | None = None,
    table: FeatureTable | None = None,
):
    if spec.kind == "ngram_bow":
        if train_captions is None:
            raise ValueError("ngram_bow needs training captions to fit its vocabulary")
        return NgramBowEncoder(spec).fit(train_captions)
    if spec.kind == "recurrent_embedding":
        if train_captions is None:
            raise ValueError("recurrent_embedding needs training captions to fit its token index")
        return RecurrentTextEncoder(spec).fit(train_captions)
    if table is None:
        raise ValueError("precomputed text encoder needs a loaded feature table")
    return PrecomputedTextEncoder(table)


def build_image_encoder(
    spec: ImageEncoderSpec,
    table: FeatureTable | None = None,
    loader=None,
):
    if spec.kind == "fixture_hash":
        return FixtureHashImageEncoder(spec, loader=loader)
    if table is None:
        raise ValueError("precomputed image encoder needs a loaded feature table")
    return PrecomputedImageEncoder(table, expected_dim=spec.output_dim)


def encode_text(encoder, caption: str) -> np.ndarray:
    """Encode a raw caption with a text-driven encoder."""
    return encoder.encode(caption)


def encode_image(encoder, image: bytes) -> np.ndarray:
    """Encode raw image bytes with a bytes-driven encoder."""
    return encoder.encode_bytes(image)

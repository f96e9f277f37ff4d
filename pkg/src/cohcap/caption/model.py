"""Coherence-conditioned caption generator.

Encoder input is the sequence [projected image vector, projected object
vectors..., coherence label embedding]; the same label id is also the
decoder's start token, so the requested relation reaches the decoder
both through cross-attention and directly. Label NONE gives the
coherence-agnostic model.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import torch
import torch.nn as nn

from ..core import CoherenceRelation
from ..evaluate.cider import cider_score
from .bpe import EOS_ID, Vocab
from .transformer import Decoder, Encoder, PositionalEncoding, subsequent_mask


class NonFiniteLossError(RuntimeError):
    pass


class EmptyCheckpointListError(ValueError):
    pass


class BatchDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class CaptionerConfig:
    enc_layers: int = 6
    dec_layers: int = 6
    heads: int = 8
    model_dim: int = 512
    ff_dim: int = 2048
    max_len: int = 32
    dropout: float = 0.1
    seed: int = 0
    image_dim: int = 64
    object_dim: int = 512

    def __post_init__(self):
        if self.model_dim % self.heads != 0:
            raise ValueError("model_dim must be divisible by heads")

    @classmethod
    def paper_preset(cls, **overrides) -> "CaptionerConfig":
        return replace(cls(), **overrides)

    @classmethod
    def desk_preset(cls, **overrides) -> "CaptionerConfig":
        cfg = cls(enc_layers=2, dec_layers=2, heads=4, model_dim=128, ff_dim=256)
        return replace(cfg, **overrides)


@dataclass
class CaptionerBatch:
    """One training example: image features, object features, requested
    label (None = agnostic), and the subtoken targets ending in EOS."""

    image_vec: np.ndarray
    object_vecs: list[np.ndarray]
    coherence_label: CoherenceRelation | None
    target_ids: list[int]

    def check(self, config: CaptionerConfig) -> None:
        if self.image_vec.shape != (config.image_dim,):
            raise BatchDimensionError(
                f"image vector has shape {self.image_vec.shape}, expected ({config.image_dim},)"
            )
        for i, vec in enumerate(self.object_vecs):
            if vec.shape != (config.object_dim,):
                raise BatchDimensionError(
                    f"object vector {i} has shape {vec.shape}, expected ({config.object_dim},)"
                )
        if not self.target_ids or self.target_ids[-1] != EOS_ID:
            raise BatchDimensionError("target_ids must be non-empty and end in EOS")
        if len(self.target_ids) > config.max_len + 2:
            raise BatchDimensionError(
                f"target has {len(self.target_ids)} subtokens but max_len is "
                f"{config.max_len}; raise max_len or learn more merges"
            )


class CoherenceCaptioner(nn.Module):
    def __init__(self, config: CaptionerConfig, vocab: Vocab):
        super().__init__()
        self.config = config
        self.vocab = vocab
        d = config.model_dim
        self.image_proj = nn.Linear(config.image_dim, d)
        self.object_proj = nn.Linear(config.object_dim, d)
        self.token_embed = nn.Embedding(len(vocab), d)
        self.positional = PositionalEncoding(d, max_len=config.max_len + 2, dropout=config.dropout)
        self.encoder = Encoder(d, config.heads, config.ff_dim, config.enc_layers, config.dropout)
        self.decoder = Decoder(d, config.heads, config.ff_dim, config.dec_layers, config.dropout)
        self.out_proj = nn.Linear(d, len(vocab))

    def _embed_tokens(self, ids: torch.Tensor) -> torch.Tensor:
        return self.token_embed(ids) * math.sqrt(self.config.model_dim)

    def assemble_encoder_inputs(self, batch: CaptionerBatch) -> torch.Tensor:
        """(1, k+2, d) sequence: image, k objects, label embedding."""
        batch.check(self.config)
        dtype = self.image_proj.weight.dtype
        parts = [self.image_proj(torch.as_tensor(batch.image_vec, dtype=dtype))]
        for vec in batch.object_vecs:
            parts.append(self.object_proj(torch.as_tensor(vec, dtype=dtype)))
        label_id = torch.tensor(self.vocab.label_id(batch.coherence_label))
        parts.append(self._embed_tokens(label_id))
        return torch.stack(parts).unsqueeze(0)

    def encode(self, batch: CaptionerBatch) -> torch.Tensor:
        return self.encoder(self.assemble_encoder_inputs(batch))

    def decode(self, memory: torch.Tensor, decoder_ids: torch.Tensor) -> torch.Tensor:
        """Logits over the vocabulary at every decoder position."""
        x = self.positional(self._embed_tokens(decoder_ids))
        mask = subsequent_mask(decoder_ids.size(1))
        return self.out_proj(self.decoder(x, memory, mask))

    def forward(self, batch: CaptionerBatch) -> torch.Tensor:
        """Teacher-forcing logits for each target position.

        The decoder input is the label start token followed by the
        targets shifted right by one.
        """
        memory = self.encode(batch)
        start = self.vocab.label_id(batch.coherence_label)
        decoder_ids = torch.tensor([[start] + batch.target_ids[:-1]], dtype=torch.long)
        return self.decode(memory, decoder_ids)


def build_captioner(config: CaptionerConfig, vocab: Vocab) -> CoherenceCaptioner:
    """Seeded construction so identical configs give identical weights."""
    with torch.random.fork_rng():
        torch.manual_seed(config.seed)
        model = CoherenceCaptioner(config, vocab)
    return model


def caption_loss(model: CoherenceCaptioner, batch: CaptionerBatch) -> torch.Tensor:
    logits = model(batch)
    targets = torch.tensor([batch.target_ids], dtype=torch.long)
    return nn.functional.cross_entropy(
        logits.view(-1, logits.size(-1)), targets.view(-1), reduction="mean"
    )


def train_captioner_step(
    model: CoherenceCaptioner, optimizer: torch.optim.Optimizer, batch: CaptionerBatch
) -> float:
    model.train()
    optimizer.zero_grad()
    loss = caption_loss(model, batch)
    value = float(loss.item())
    if not math.isfinite(value):
        raise NonFiniteLossError(f"caption loss {value} on a batch of {len(batch.target_ids)} targets")
    loss.backward()
    optimizer.step()
    return value


@dataclass
class GenerationResult:
    text: str
    token_ids: list[int]
    truncated: bool


def _step_scores(model: CoherenceCaptioner, memory: torch.Tensor, ids: list[int]) -> torch.Tensor:
    decoder_ids = torch.tensor([ids], dtype=torch.long)
    logits = model.decode(memory, decoder_ids)
    return torch.log_softmax(logits[0, -1], dim=-1)


def generate_caption(
    model: CoherenceCaptioner,
    image_vec: np.ndarray,
    object_vecs: Sequence[np.ndarray],
    label: CoherenceRelation | None,
    decode: str = "greedy",
    beam_size: int = 4,
    length_norm: float = 1.0,
    max_len: int | None = None,
) -> GenerationResult:
    """Decode a caption for the given features under the given label.

    Greedy picks the argmax token each step; beam search keeps up to
    ``beam_size`` (≤ 8) hypotheses ranked by total log-probability
    divided by length**length_norm. Both stop at EOS or ``max_len``
    (truncation is flagged, not an error).
    """
    if decode not in ("greedy", "beam"):
        raise ValueError(f"unknown decode strategy {decode!r}")
    if decode == "beam" and not 1 <= beam_size <= 8:
        raise ValueError("beam_size must lie in 1..8")
    limit = max_len if max_len is not None else model.config.max_len
    batch = CaptionerBatch(
        image_vec=np.asarray(image_vec),
        object_vecs=[np.asarray(v) for v in object_vecs],
        coherence_label=label,
        target_ids=[EOS_ID],  # placeholder so dimension checks pass
    )
    model.eval()
    with torch.no_grad():
        memory = model.encode(batch)
        start = model.vocab.label_id(label)

        if decode == "greedy":
            ids = [start]
            for _ in range(limit):
                next_id = int(torch.argmax(_step_scores(model, memory, ids)))
                ids.append(next_id)
                if next_id == EOS_ID:
                    break
            out_ids = ids[1:]
            truncated = not out_ids or out_ids[-1] != EOS_ID
            return GenerationResult(model.vocab.decode(out_ids), out_ids, truncated)

        # beam search over (ids, summed log-prob, finished)
        beams: list[tuple[list[int], float, bool]] = [([start], 0.0, False)]
        for _ in range(limit):
            if all(done for _, _, done in beams):
                break
            candidates: list[tuple[list[int], float, bool]] = []
            for ids, score, done in beams:
                if done:
                    candidates.append((ids, score, done))
                    continue
                log_probs = _step_scores(model, memory, ids)
                top = torch.topk(log_probs, beam_size)
                for token, lp in zip(top.indices.tolist(), top.values.tolist()):
                    candidates.append((ids + [token], score + lp, token == EOS_ID))
            candidates.sort(key=lambda c: -(c[1] / max(1, len(c[0]) - 1) ** length_norm))
            beams = candidates[:beam_size]
        best_ids, _, finished = max(
            beams, key=lambda c: c[1] / max(1, len(c[0]) - 1) ** length_norm
        )
        out_ids = best_ids[1:]
        return GenerationResult(model.vocab.decode(out_ids), out_ids, not finished)


@dataclass
class CaptionEpochStats:
    epoch: int
    mean_loss: float


@dataclass
class CaptionTrainingLog:
    epochs: list[CaptionEpochStats] = field(default_factory=list)
    checkpoint_scores: list[tuple[int, float]] = field(default_factory=list)
    best_step: int | None = None


def train_captioner(
    config: CaptionerConfig,
    train_batches: Sequence[CaptionerBatch],
    vocab: Vocab,
    epochs: int = 10,
    learning_rate: float = 1e-3,
    val_batches: Sequence[CaptionerBatch] = (),
    checkpoint_every: int | None = None,
) -> tuple[CoherenceCaptioner, CaptionTrainingLog]:
    """Adam training loop with optional metric-based checkpoint selection.

    With validation batches, model states are snapshotted every
    ``checkpoint_every`` epochs (default: once at the end) and the best
    snapshot by corpus caption score is restored before returning; ties
    go to the latest step.
    """
    if not train_batches:
        raise ValueError("training set is empty")
    for b in train_batches:
        b.check(config)
    n_threads = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        torch.manual_seed(config.seed)
        model = build_captioner(config, vocab)
        optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)
        shuffler = torch.Generator().manual_seed(config.seed)
        log = CaptionTrainingLog()
        snapshots: list[tuple[int, dict]] = []
        interval = checkpoint_every if checkpoint_every is not None else epochs

        for epoch in range(epochs):
            order = torch.randperm(len(train_batches), generator=shuffler).tolist()
            total = 0.0
            for i in order:
                total += train_captioner_step(model, optimizer, train_batches[i])
            log.epochs.append(CaptionEpochStats(epoch=epoch, mean_loss=total / len(train_batches)))
            if val_batches and ((epoch + 1) % interval == 0 or epoch == epochs - 1):
                snapshots.append((epoch + 1, copy.deepcopy(model.state_dict())))

        if snapshots:
            def score_snapshot(state: dict) -> float:
                probe = build_captioner(config, vocab)
                probe.load_state_dict(state)
                return validation_caption_score(probe, val_batches)

            scored = [(step, score_snapshot(state), state) for step, state in snapshots]
            log.checkpoint_scores = [(step, score) for step, score, _ in scored]
            best_step, _, best_state = select_checkpoint(
                [(step, state) for step, _, state in scored],
                score_of=dict(log.checkpoint_scores).__getitem__,
            )
            log.best_step = best_step
            model.load_state_dict(best_state)
        model.eval()
        return model, log
    finally:
        torch.set_num_threads(n_threads)


def validation_caption_score(
    model: CoherenceCaptioner, val_batches: Sequence[CaptionerBatch]
) -> float:
    """Corpus caption score of greedy decodes against the target texts."""
    candidates = []
    references = []
    for b in val_batches:
        result = generate_caption(model, b.image_vec, b.object_vecs, b.coherence_label)
        candidates.append(result.text)
        references.append([model.vocab.decode(b.target_ids)])
    return cider_score(candidates, references).corpus_score


def select_checkpoint(
    checkpoints: Sequence[tuple[int, object]],
    score_of: Callable[[int], float],
) -> tuple[int, float, object]:
    """Best (step, score, payload) by score; equal scores pick the
    latest step."""
    if not checkpoints:
        raise EmptyCheckpointListError("no checkpoints to select from")
    best = None
    for step, payload in checkpoints:
        score = score_of(step)
        if best is None or score > best[1] or (score == best[1] and step > best[0]):
            best = (step, score, payload)
    return best

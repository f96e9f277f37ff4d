"""Coherence-conditioned caption generation."""

from .bpe import (
    EOS_ID,
    PAD_ID,
    RESERVED_TOKENS,
    UNK_ID,
    EmptyCorpusError,
    Vocab,
    build_vocab,
    label_token,
)
from .io import load_captioner, save_captioner
from .model import (
    BatchDimensionError,
    CaptionerBatch,
    CaptionerConfig,
    CaptionTrainingLog,
    CoherenceCaptioner,
    EmptyCheckpointListError,
    GenerationResult,
    NonFiniteLossError,
    build_captioner,
    caption_loss,
    generate_caption,
    select_checkpoint,
    train_captioner,
    train_captioner_step,
    validation_caption_score,
)

__all__ = [
    "BatchDimensionError",
    "CaptionTrainingLog",
    "CaptionerBatch",
    "CaptionerConfig",
    "CoherenceCaptioner",
    "EOS_ID",
    "EmptyCheckpointListError",
    "EmptyCorpusError",
    "GenerationResult",
    "NonFiniteLossError",
    "PAD_ID",
    "RESERVED_TOKENS",
    "UNK_ID",
    "Vocab",
    "build_captioner",
    "build_vocab",
    "caption_loss",
    "generate_caption",
    "label_token",
    "load_captioner",
    "save_captioner",
    "select_checkpoint",
    "train_captioner",
    "train_captioner_step",
    "validation_caption_score",
]

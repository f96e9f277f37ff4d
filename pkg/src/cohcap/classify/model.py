"""Fusion classifier over concatenated text and image vectors."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import torch
import torch.nn as nn

from ..core import PRIMARY_RELATIONS

N_CLASSES = len(PRIMARY_RELATIONS)

#: class index of each primary relation, fixed by canonical order
CLASS_INDEX = {rel: i for i, rel in enumerate(PRIMARY_RELATIONS)}
CLASS_LABELS = [rel.value for rel in PRIMARY_RELATIONS]


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class EncodedExample:
    """One classification example: fused features plus its target.

    ``target`` is a class index in single-label mode and a 6-long 0/1
    vector in multi-label mode; ``image_vec`` may be empty for text-only
    runs.
    """

    pair_id: str
    text_vec: np.ndarray
    image_vec: np.ndarray
    target: int | np.ndarray

    def fused(self) -> np.ndarray:
        if self.image_vec.size == 0:
            return self.text_vec
        return np.concatenate([self.text_vec, self.image_vec])


@dataclass(frozen=True)
class ClassifierConfig:
    mode: str = "single_label"  # or multi_label
    hidden_layers: tuple[int, ...] = (256, 256, 256)
    dropout_p: float = 0.5
    optimizer: str = "adam"
    learning_rate: float = 1e-6
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("single_label", "multi_label"):
            raise ValueError(f"unknown classifier mode {self.mode!r}")
        if any(w <= 0 for w in self.hidden_layers):
            raise ValueError("hidden layer widths must be positive")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError("dropout_p must lie in [0, 1)")
        if self.optimizer != "adam":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")

    def desk_preset(self) -> "ClassifierConfig":
        """Settings that converge on toy corpora in seconds."""
        return replace(self, learning_rate=1e-3, epochs=50)


class FusionClassifier(nn.Module):
    """MLP head over the fused feature vector.

    Hidden layers are ReLU with dropout; the output layer emits one
    logit per primary relation. Score semantics (softmax vs independent
    sigmoids) are chosen by the config mode at call sites, not baked
    into the module.
    """

    def __init__(self, input_dim: int, config: ClassifierConfig):
        super().__init__()
        self.input_dim = input_dim
        self.config = config
        layers: list[nn.Module] = []
        prev = input_dim
        for width in config.hidden_layers:
            layers.append(nn.Linear(prev, width))
            layers.append(nn.ReLU())
            layers.append(nn.Dropout(config.dropout_p))
            prev = width
        layers.append(nn.Linear(prev, N_CLASSES))
        self.net = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


def _as_batch(model: FusionClassifier, examples) -> torch.Tensor:
    rows = []
    for ex in examples:
        vec = ex.fused()
        if vec.shape[0] != model.input_dim:
            raise DimensionMismatchError(
                f"example {ex.pair_id!r} has fused dim {vec.shape[0]}, model expects {model.input_dim}"
            )
        rows.append(vec)
    return torch.tensor(np.stack(rows), dtype=torch.float32)


def classify_forward(model: FusionClassifier, examples) -> np.ndarray:
    """Class scores for a batch: softmax rows in single-label mode,
    independent sigmoids in multi-label mode.
    """
    single = not isinstance(examples, (list, tuple))
    batch = [examples] if single else list(examples)
    model.eval()
    with torch.no_grad():
        logits = model(_as_batch(model, batch))
        if model.config.mode == "single_label":
            scores = torch.softmax(logits, dim=1)
        else:
            scores = torch.sigmoid(logits)
    out = scores.numpy().astype(np.float64)
    return out[0] if single else out


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_weighted_f1: float | None


@dataclass
class TrainingLog:
    config: ClassifierConfig
    input_dim: int
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int | None = None

    def as_lines(self) -> list[str]:
        lines = []
        for s in self.epochs:
            dev = "n/a" if s.dev_weighted_f1 is None else f"{s.dev_weighted_f1:.6f}"
            lines.append(f"epoch {s.epoch} loss {s.train_loss!r} dev_weighted_f1 {dev}")
        if self.best_epoch is not None:
            lines.append(f"best_epoch {self.best_epoch}")
        return lines

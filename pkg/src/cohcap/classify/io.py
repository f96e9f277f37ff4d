"""Save/load trained classifiers in the shared checkpoint format."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from ..checkpoint import load_checkpoint, save_checkpoint
from .model import ClassifierConfig, FusionClassifier


def save_classifier(
    model: FusionClassifier,
    out_dir: str | Path,
    vocabulary: list[str] | None = None,
    extra_meta: dict | None = None,
) -> Path:
    arrays = {name: tensor.detach().numpy() for name, tensor in model.state_dict().items()}
    meta = {
        "model": "fusion_classifier",
        "input_dim": model.input_dim,
        "config": asdict(model.config),
        "vocabulary": vocabulary,
    }
    if extra_meta:
        meta.update(extra_meta)
    return save_checkpoint(out_dir, arrays, meta)


def load_classifier(in_dir: str | Path) -> tuple[FusionClassifier, dict]:
    arrays, meta = load_checkpoint(in_dir)
    cfg_dict = dict(meta["config"])
    cfg_dict["hidden_layers"] = tuple(cfg_dict["hidden_layers"])
    config = ClassifierConfig(**cfg_dict)
    model = FusionClassifier(meta["input_dim"], config)
    state = {name: torch.tensor(np.asarray(arr)) for name, arr in arrays.items()}
    model.load_state_dict(state)
    model.eval()
    return model, meta

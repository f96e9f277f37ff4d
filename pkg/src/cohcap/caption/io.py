"""Save/load trained captioners in the shared checkpoint format."""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from ..checkpoint import load_checkpoint, save_checkpoint
from .bpe import Vocab
from .model import CaptionerConfig, CoherenceCaptioner, build_captioner


def save_captioner(model: CoherenceCaptioner, out_dir: str | Path, extra_meta: dict | None = None) -> Path:
    arrays = {name: tensor.detach().numpy() for name, tensor in model.state_dict().items()}
    meta = {
        "model": "coherence_captioner",
        "config": asdict(model.config),
        "vocab": model.vocab.to_dict(),
    }
    if extra_meta:
        meta.update(extra_meta)
    return save_checkpoint(out_dir, arrays, meta)


def load_captioner(in_dir: str | Path) -> tuple[CoherenceCaptioner, dict]:
    arrays, meta = load_checkpoint(in_dir)
    config = CaptionerConfig(**meta["config"])
    vocab = Vocab.from_dict(meta["vocab"])
    model = build_captioner(config, vocab)
    state = {name: torch.tensor(np.asarray(arr)) for name, arr in arrays.items()}
    model.load_state_dict(state)
    model.eval()
    return model, meta

"""Model checkpoints: a flat binary of named float arrays next to a
JSON manifest describing their layout plus arbitrary model metadata
(dims, config, vocabulary). The manifest orders the arrays; the binary
is their raw little-endian bytes concatenated in that order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

WEIGHTS_FILE = "weights.bin"
MANIFEST_FILE = "manifest.json"


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(out_dir: str | Path, arrays: dict[str, np.ndarray], meta: dict) -> Path:
    """Write ``arrays`` and ``meta`` under ``out_dir``; returns the dir.

    Array iteration order is preserved in the manifest, so callers with
    a stable order (e.g. a module state dict) get byte-identical files
    on rewrite.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    with open(out_dir / WEIGHTS_FILE, "wb") as fh:
        for name, arr in arrays.items():
            data = np.ascontiguousarray(arr, dtype=np.float32)
            raw = data.tobytes()
            entries.append(
                {"name": name, "dtype": "float32", "shape": list(data.shape), "offset": offset}
            )
            fh.write(raw)
            offset += len(raw)
    manifest = {"format": "cohcap-checkpoint-v1", "arrays": entries, "meta": meta}
    (out_dir / MANIFEST_FILE).write_text(
        json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    return out_dir


def load_checkpoint(in_dir: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    in_dir = Path(in_dir)
    manifest_path = in_dir / MANIFEST_FILE
    weights_path = in_dir / WEIGHTS_FILE
    if not manifest_path.exists() or not weights_path.exists():
        raise CheckpointError(f"no checkpoint at {in_dir}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format") != "cohcap-checkpoint-v1":
        raise CheckpointError(f"unrecognized checkpoint format {manifest.get('format')!r}")
    raw = weights_path.read_bytes()
    arrays: dict[str, np.ndarray] = {}
    for entry in manifest["arrays"]:
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        start = entry["offset"]
        end = start + count * 4
        if end > len(raw):
            raise CheckpointError(f"array {entry['name']!r} runs past end of weights file")
        arrays[entry["name"]] = np.frombuffer(raw[start:end], dtype=np.float32).reshape(
            entry["shape"]
        ).copy()
    return arrays, manifest["meta"]

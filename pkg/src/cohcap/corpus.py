"""Ingestion and persistence: caption TSV loading, the annotation store,
feature files for precomputed embeddings, image fetching with a local
cache, and URL-domain extraction for genre statistics.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence
from urllib.parse import urlparse

from .core import (
    AnnotationRecord,
    ImageCaptionPair,
    Origin,
    RelationSet,
    parse_facet,
    parse_label,
    validate_relation_set,
)

SPLITS = ("train", "validation", "eval")


class CorpusError(Exception):
    """Base class for ingestion/persistence failures."""


class EmptyFileError(CorpusError):
    pass


class MalformedLineError(CorpusError):
    def __init__(self, path: str | Path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.line_no = line_no


class InvalidUrlError(CorpusError):
    pass


class SchemaViolationError(CorpusError):
    def __init__(self, path: str | Path, line_no: int, fld: str, reason: str):
        super().__init__(f"{path}:{line_no}: field {fld!r}: {reason}")
        self.line_no = line_no
        self.field = fld


class DuplicateAnnotationError(CorpusError):
    pass


class NetworkFailure(CorpusError):
    """Transient fetch failure; safe to retry."""

    retryable = True


class MissingFixtureError(CorpusError):
    pass


class MissingFeatureError(CorpusError):
    pass


def domain_of_url(url: str) -> str:
    """Registrable hostname of ``url``: lowercased, leading ``www.`` stripped."""
    parsed = urlparse(url)
    host = parsed.hostname
    if not host or parsed.scheme not in ("http", "https"):
        raise InvalidUrlError(f"not a valid http(s) URL: {url!r}")
    host = host.lower()
    if host.startswith("www."):
        host = host[len("www.") :]
    return host


@dataclass
class CaptionCorpus:
    """Ordered collection of pairs from one split of a caption dataset."""

    pairs: list[ImageCaptionPair]
    split: str

    def __post_init__(self) -> None:
        ids = [p.pair_id for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise CorpusError("duplicate pair_id in corpus")
        self._by_id = {p.pair_id: p for p in self.pairs}

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def get(self, pair_id: str) -> ImageCaptionPair | None:
        return self._by_id.get(pair_id)


def load_captions_tsv(
    path: str | Path,
    split: str,
    origin: Origin = Origin.GROUND_TRUTH,
    pair_id_prefix: str | None = None,
) -> CaptionCorpus:
    """Load a caption TSV (``caption TAB image-url``, UTF-8, no header).

    Pair ids are ``{split}:{zero-based line number}`` so re-loads of the
    same file always produce the same ids. Model-output files should pass
    ``pair_id_prefix="model"`` to keep their ids disjoint from
    ground-truth ones.
    """
    if split not in SPLITS:
        raise CorpusError(f"unknown split {split!r}; expected one of {SPLITS}")
    prefix = pair_id_prefix if pair_id_prefix is not None else split
    pairs: list[ImageCaptionPair] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh):
            line = raw.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise MalformedLineError(path, line_no, "expected caption TAB url")
            caption, url = line.split("\t", 1)
            if not caption:
                raise MalformedLineError(path, line_no, "empty caption")
            pairs.append(
                ImageCaptionPair(
                    pair_id=f"{prefix}:{line_no}",
                    image_ref=url,
                    caption=caption,
                    source_domain=domain_of_url(url),
                    origin=origin,
                )
            )
    if not pairs:
        raise EmptyFileError(f"no caption lines in {path}")
    return CaptionCorpus(pairs=pairs, split=split)


# Annotation store: UTF-8 JSON-lines, one record per line, keys exactly
# pair_id, annotator_id, relations, facets, comment, timestamp.

_RECORD_KEYS = ("pair_id", "annotator_id", "relations", "facets", "comment", "timestamp")


def record_to_json(record: AnnotationRecord) -> dict:
    return {
        "pair_id": record.pair_id,
        "annotator_id": record.annotator_id,
        "relations": record.labels.relation_labels(),
        "facets": record.labels.facet_labels(),
        "comment": record.comment,
        "timestamp": record.timestamp,
    }


def record_from_json(obj: dict, path: str | Path = "<mem>", line_no: int = 0) -> AnnotationRecord:
    for key in _RECORD_KEYS:
        if key not in obj:
            raise SchemaViolationError(path, line_no, key, "missing")
    if not isinstance(obj["pair_id"], str) or not obj["pair_id"]:
        raise SchemaViolationError(path, line_no, "pair_id", "must be a non-empty string")
    if not isinstance(obj["annotator_id"], str) or not obj["annotator_id"]:
        raise SchemaViolationError(path, line_no, "annotator_id", "must be a non-empty string")
    if not isinstance(obj["relations"], list):
        raise SchemaViolationError(path, line_no, "relations", "must be an array")
    if not isinstance(obj["facets"], list):
        raise SchemaViolationError(path, line_no, "facets", "must be an array")
    if obj["comment"] is not None and not isinstance(obj["comment"], str):
        raise SchemaViolationError(path, line_no, "comment", "must be a string or null")
    if not isinstance(obj["timestamp"], int):
        raise SchemaViolationError(path, line_no, "timestamp", "must be an integer")
    try:
        labels = RelationSet(
            relations=frozenset(parse_label(r) for r in obj["relations"]),
            facets=frozenset(parse_facet(f) for f in obj["facets"]),
        )
    except ValueError as exc:
        raise SchemaViolationError(path, line_no, "relations", str(exc)) from exc
    violations = validate_relation_set(labels)
    if violations:
        raise SchemaViolationError(path, line_no, "relations", "; ".join(violations))
    return AnnotationRecord(
        pair_id=obj["pair_id"],
        annotator_id=obj["annotator_id"],
        labels=labels,
        comment=obj["comment"],
        timestamp=obj["timestamp"],
    )


@dataclass
class AnnotationStore:
    """Append-only sequence of annotation records.

    When bound to a path, every append is written through and flushed
    before returning, so an acked submission survives a process restart.
    Appends must go through a single writer; readers may hold the record
    list, which is never mutated in place past its current length.
    """

    records: list[AnnotationRecord] = field(default_factory=list)
    path: Path | None = None

    def __post_init__(self) -> None:
        self._index: dict[tuple[str, str], AnnotationRecord] = {}
        for rec in self.records:
            key = (rec.pair_id, rec.annotator_id)
            if key in self._index:
                raise DuplicateAnnotationError(f"duplicate annotation for {key}")
            self._index[key] = rec

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, pair_id: str, annotator_id: str) -> AnnotationRecord | None:
        return self._index.get((pair_id, annotator_id))

    def by_annotator(self, annotator_id: str) -> list[AnnotationRecord]:
        return [r for r in self.records if r.annotator_id == annotator_id]

    def annotated_pair_ids(self, annotator_id: str) -> set[str]:
        return {r.pair_id for r in self.records if r.annotator_id == annotator_id}


def load_annotations(path: str | Path) -> AnnotationStore:
    records: list[AnnotationRecord] = []
    path = Path(path)
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh):
                line = raw.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaViolationError(path, line_no, "<line>", "invalid JSON") from exc
                records.append(record_from_json(obj, path, line_no))
    return AnnotationStore(records=records, path=path)


def append_annotation(store: AnnotationStore, record: AnnotationRecord) -> AnnotationStore:
    """Append one record, enforcing validity and (pair, annotator) uniqueness.

    Durable before return when the store is path-bound.
    """
    violations = validate_relation_set(record.labels)
    if violations:
        raise SchemaViolationError("<append>", len(store.records), "relations", "; ".join(violations))
    key = (record.pair_id, record.annotator_id)
    if key in store._index:
        raise DuplicateAnnotationError(f"duplicate annotation for {key}")
    if store.path is not None:
        store.path.parent.mkdir(parents=True, exist_ok=True)
        with open(store.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record_to_json(record), ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    store.records.append(record)
    store._index[key] = record
    return store


def save_annotations(store: AnnotationStore, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in store.records:
            fh.write(json.dumps(record_to_json(rec), ensure_ascii=False) + "\n")


# Pair JSONL: same line-per-object shape as the annotation store so a
# corpus can be checked in or shipped alongside its annotations.


def pair_to_json(pair: ImageCaptionPair) -> dict:
    return {
        "pair_id": pair.pair_id,
        "image_ref": pair.image_ref,
        "caption": pair.caption,
        "source_domain": pair.source_domain,
        "origin": pair.origin.value,
    }


def pair_from_json(obj: dict, path: str | Path = "<mem>", line_no: int = 0) -> ImageCaptionPair:
    for key in ("pair_id", "image_ref", "caption"):
        if key not in obj or not isinstance(obj[key], str) or not obj[key]:
            raise SchemaViolationError(path, line_no, key, "must be a non-empty string")
    return ImageCaptionPair(
        pair_id=obj["pair_id"],
        image_ref=obj["image_ref"],
        caption=obj["caption"],
        source_domain=obj.get("source_domain", "") or domain_of_url(obj["image_ref"]),
        origin=Origin(obj.get("origin", Origin.GROUND_TRUTH.value)),
    )


def save_pairs_jsonl(pairs: Sequence[ImageCaptionPair], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair_to_json(pair), ensure_ascii=False) + "\n")


def load_pairs_jsonl(path: str | Path) -> list[ImageCaptionPair]:
    path = Path(path)
    pairs: list[ImageCaptionPair] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(path, line_no, f"invalid JSON: {exc}") from exc
            pairs.append(pair_from_json(obj, path, line_no))
    if not pairs:
        raise EmptyFileError(f"no pair lines in {path}")
    return pairs


# Image fetching. Fixture mode maps a ref to a pre-seeded local file and
# never touches the network, which keeps every pipeline runnable offline.


def ref_key(image_ref: str) -> str:
    return hashlib.sha256(image_ref.encode("utf-8")).hexdigest()


def seed_fixture_image(fixture_dir: str | Path, image_ref: str, data: bytes) -> Path:
    """Install ``data`` as the fixture bytes for ``image_ref``."""
    fixture_dir = Path(fixture_dir)
    fixture_dir.mkdir(parents=True, exist_ok=True)
    target = fixture_dir / ref_key(image_ref)
    target.write_bytes(data)
    return target


def fetch_image(
    image_ref: str,
    cache_dir: str | Path,
    mode: str = "fixture",
    fixture_dir: str | Path | None = None,
    http_get: Callable[[str], bytes] | None = None,
) -> bytes:
    """Return the image bytes for ``image_ref``.

    The cache is content-addressed: ``by-ref/<sha256(ref)>`` points at
    ``blobs/<sha256(bytes)>``, so identical images fetched under several
    refs are stored once. A cache hit performs no fetch in either mode.
    """
    cache_dir = Path(cache_dir)
    by_ref = cache_dir / "by-ref" / ref_key(image_ref)
    if by_ref.exists():
        blob = cache_dir / "blobs" / by_ref.read_text().strip()
        if blob.exists():
            return blob.read_bytes()

    if mode == "fixture":
        if fixture_dir is None:
            raise MissingFixtureError("fixture mode requires fixture_dir")
        source = Path(fixture_dir) / ref_key(image_ref)
        if not source.exists():
            raise MissingFixtureError(f"no fixture for {image_ref!r}")
        data = source.read_bytes()
    elif mode == "network":
        if http_get is None:
            http_get = _requests_get
        try:
            data = http_get(image_ref)
        except Exception as exc:
            raise NetworkFailure(f"fetch failed for {image_ref!r}: {exc}") from exc
    else:
        raise CorpusError(f"unknown fetch mode {mode!r}")

    content_key = hashlib.sha256(data).hexdigest()
    (cache_dir / "blobs").mkdir(parents=True, exist_ok=True)
    (cache_dir / "by-ref").mkdir(parents=True, exist_ok=True)
    (cache_dir / "blobs" / content_key).write_bytes(data)
    by_ref.write_text(content_key)
    return data


def _requests_get(url: str) -> bytes:
    import requests

    resp = requests.get(url, timeout=30)
    resp.raise_for_status()
    return resp.content


# Precomputed-embedding feature files: JSONL of
# {pair_id, text_vec: [float], image_vec: [float]}.


@dataclass
class FeatureTable:
    text_vecs: dict[str, list[float]]
    image_vecs: dict[str, list[float]]

    def text_vec(self, pair_id: str) -> list[float]:
        if pair_id not in self.text_vecs:
            raise MissingFeatureError(f"no text features for pair {pair_id!r}")
        return self.text_vecs[pair_id]

    def image_vec(self, pair_id: str) -> list[float]:
        if pair_id not in self.image_vecs:
            raise MissingFeatureError(f"no image features for pair {pair_id!r}")
        return self.image_vecs[pair_id]


def load_feature_file(path: str | Path) -> FeatureTable:
    text_vecs: dict[str, list[float]] = {}
    image_vecs: dict[str, list[float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh):
            line = raw.strip()
            if not line:
                continue
            obj = json.loads(line)
            for key in ("pair_id", "text_vec", "image_vec"):
                if key not in obj:
                    raise SchemaViolationError(path, line_no, key, "missing")
            pid = obj["pair_id"]
            text_vecs[pid] = [float(x) for x in obj["text_vec"]]
            image_vecs[pid] = [float(x) for x in obj["image_vec"]]
    return FeatureTable(text_vecs=text_vecs, image_vecs=image_vecs)


def save_feature_file(
    path: str | Path,
    entries: Sequence[tuple[str, Sequence[float], Sequence[float]]],
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair_id, text_vec, image_vec in entries:
            fh.write(
                json.dumps(
                    {
                        "pair_id": pair_id,
                        "text_vec": [float(x) for x in text_vec],
                        "image_vec": [float(x) for x in image_vec],
                    }
                )
                + "\n"
            )

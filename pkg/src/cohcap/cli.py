"""Command-line entry point.

Every command that writes files also writes a ``manifest.json`` next to
them holding the resolved configuration, SHA-256 hashes of the inputs,
and the package version, so an output directory is self-describing and a
run can be repeated exactly. Manifests carry no timestamps: repeating a
command with the same inputs reproduces every output byte for byte.

Exit codes: 0 success, 1 runtime failure (bad data, missing features,
training blow-up), 2 usage or configuration error.
"""

from __future__ import annotations

import hashlib
import json
import random
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__
from .caption import (
    CaptionerBatch,
    CaptionerConfig,
    build_vocab,
    generate_caption,
    load_captioner,
    save_captioner,
    train_captioner,
)
from .classify import (
    ClassifierConfig,
    ImageEncoderSpec,
    NgramBowEncoder,
    RecurrentTextEncoder,
    TextEncoderSpec,
    build_examples,
    build_image_encoder,
    build_text_encoder,
    evaluate_classifier,
    load_classifier,
    save_classifier,
)
from .classify.model import CLASS_LABELS
from .core import (
    CoherenceRelation,
    MetaFacet,
    RelationSet,
    parse_label,
)
from .corpus import (
    CorpusError,
    MissingFeatureError,
    load_annotations,
    load_captions_tsv,
    load_feature_file,
    load_pairs_jsonl,
    save_pairs_jsonl,
)
from .evaluate.cider import EmptyReferenceError, cider_score
from .evaluate.figures import render_figures
from .evaluate.report import (
    ReportTable,
    distribution_table,
    emit_report,
    overlap_table,
)
from .evaluate.stats import (
    genre_distribution,
    overlap_rate,
    relation_distribution,
    union_labels,
)
from .labelmap import EmptyPrimarySetError, map_to_single
from .service import create_app, plan_assignments

RUNTIME_ERRORS = (
    CorpusError,
    EmptyReferenceError,
    EmptyPrimarySetError,
    MissingFeatureError,
    FileNotFoundError,
    ValueError,
    KeyError,
)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    inputs: dict[str, Path | str | None],
    outputs: list[str],
) -> Path:
    """Self-description of a run: resolved config, input hashes, outputs."""
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {
            name: {"path": str(p), "sha256": _sha256(Path(p))}
            for name, p in inputs.items()
            if p is not None
        },
        "outputs": sorted(outputs),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    # checkpoint directories already use manifest.json for array layout,
    # so the run manifest keeps its own name everywhere
    path = out_dir / "run-manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_pairs(path: str, split: str = "train"):
    """Pairs come either as JSONL or as a caption TSV."""
    if str(path).endswith((".tsv", ".txt")):
        return list(load_captions_tsv(path, split=split))
    return load_pairs_jsonl(path)


def _read_json_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise click.ClickException(f"config file {path} must hold a JSON object")
    return obj


def fail(exc: Exception) -> "SystemExit":
    raise click.ClickException(f"{type(exc).__name__}: {exc}")


@click.group(name="cohcap")
@click.version_option(__version__)
def main():
    """Image-caption coherence toolkit: annotation, statistics,
    relation classification, and label-conditioned captioning."""


# --------------------------------------------------------------------- ingest


@main.command()
@click.option("--captions", required=True, type=click.Path(exists=True), help="Caption TSV (caption TAB image-url).")
@click.option("--split", default="train", type=click.Choice(["train", "validation", "eval"]))
@click.option("--model-output", is_flag=True, help="Mark pairs as model generations, not ground truth.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def ingest(captions, split, model_output, out_dir):
    """Normalize a caption TSV into a pairs JSONL file."""
    from .core import Origin

    out = Path(out_dir)
    try:
        corpus = load_captions_tsv(
            captions,
            split=split,
            origin=Origin.MODEL_OUTPUT if model_output else Origin.GROUND_TRUTH,
            pair_id_prefix="model" if model_output else None,
        )
        out.mkdir(parents=True, exist_ok=True)
        save_pairs_jsonl(list(corpus), out / "pairs.jsonl")
    except RUNTIME_ERRORS as exc:
        fail(exc)
    write_manifest(
        out,
        "ingest",
        {"split": split, "model_output": model_output},
        {"captions": captions},
        ["pairs.jsonl"],
    )
    click.echo(f"wrote {len(corpus)} pairs to {out / 'pairs.jsonl'}")


# ----------------------------------------------------------------- map-labels


@main.command("map-labels")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True), help="Annotation JSONL.")
@click.option("--seed", required=True, type=int, help="Seed for the mixed-relation draw.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def map_labels(in_path, seed, out_path):
    """Collapse multi-label annotations to one relation per pair.

    Pairs whose annotations hold no content relation are dropped.
    Output lines are sorted by pair id, so reruns are byte-identical.
    """
    out = Path(out_path)
    try:
        store = load_annotations(in_path)
        merged = union_labels(store)
    except RUNTIME_ERRORS as exc:
        fail(exc)
    lines = []
    n_dropped = 0
    for pair_id in sorted(merged):
        rels, facets = merged[pair_id]
        rs = RelationSet(relations=frozenset(rels), facets=frozenset(facets))
        if not rs.primary_relations():
            n_dropped += 1
            continue
        label = map_to_single(rs, seed=seed)
        lines.append(json.dumps({"pair_id": pair_id, "label": label.value}))
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    write_manifest(
        out.parent,
        "map-labels",
        {"seed": seed},
        {"annotations": in_path},
        [out.name],
    )
    click.echo(f"mapped {len(lines)} pairs ({n_dropped} without a content relation dropped)")


# ---------------------------------------------------------------------- stats


def _facet_table(report, name: str) -> ReportTable:
    columns = ["group", "n_meta_pairs"] + [f.value for f in MetaFacet]
    table = ReportTable(name=name, columns=columns)
    for g in report.groups:
        table.rows.append(
            [g.group, g.n_meta_pairs] + [g.facet_pct[f.value] for f in MetaFacet]
        )
    return table


def _mapped_label_table(merged, seed: int, name: str) -> ReportTable:
    counts = {label: 0 for label in CLASS_LABELS}
    kept = 0
    for pair_id in sorted(merged):
        rels, facets = merged[pair_id]
        rs = RelationSet(relations=frozenset(rels), facets=frozenset(facets))
        if not rs.primary_relations():
            continue
        counts[map_to_single(rs, seed=seed).value] += 1
        kept += 1
    table = ReportTable(name=name, columns=["label", "n_pairs", "percent"])
    for label in CLASS_LABELS:
        pct = 100.0 * counts[label] / kept if kept else 0.0
        table.rows.append([label, counts[label], pct])
    return table


KNOWN_TABLES = ("1", "2", "4-gt", "5", "overlap")


@main.command()
@click.option("--annotations", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True), help="Pairs JSONL or caption TSV.")
@click.option("--tables", default="1,2,4-gt,5", show_default=True, help="Comma-separated subset of " + ",".join(KNOWN_TABLES))
@click.option("--seed", default=0, show_default=True, help="Seed for the single-label table.")
@click.option("--top-genres", default=8, show_default=True)
@click.option("--formats", default="csv,markdown,plotdata-json", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def stats(annotations, pairs_path, tables, seed, top_genres, formats, out_dir):
    """Corpus statistics: label/facet distributions, the collapsed
    single-label distribution, genre breakdowns, and label overlap.

    Emits one CSV per table plus a combined markdown report and plot
    data; distribution-shaped tables also get a rendered PNG figure.
    """
    wanted = [t.strip() for t in tables.split(",") if t.strip()]
    unknown = [t for t in wanted if t not in KNOWN_TABLES]
    if unknown:
        raise click.UsageError(f"unknown table(s) {unknown}; choose from {KNOWN_TABLES}")
    fmt_list = [f.strip() for f in formats.split(",") if f.strip()]
    out = Path(out_dir)
    try:
        pairs = _load_pairs(pairs_path)
        store = load_annotations(annotations)
        merged = union_labels(store)

        report_tables: list[ReportTable] = []
        dist = relation_distribution(store, pairs)
        if "1" in wanted:
            report_tables.append(distribution_table(dist, "relation_distribution"))
        if "2" in wanted:
            report_tables.append(_facet_table(dist, "facet_distribution"))
        if "4-gt" in wanted:
            report_tables.append(_mapped_label_table(merged, seed, "single_label_distribution"))
        if "5" in wanted:
            report_tables.append(
                distribution_table(genre_distribution(store, pairs, top=top_genres), "genre_distribution")
            )
        if "overlap" in wanted:
            rates = [
                overlap_rate(store, CoherenceRelation.VISIBLE, CoherenceRelation.META, denominator=d)
                for d in ("all", "a", "b")
            ]
            report_tables.append(overlap_table(rates, "visible_meta_overlap"))

        written = emit_report(report_tables, out, formats=fmt_list)
        figures = render_figures(report_tables, out)
    except RUNTIME_ERRORS as exc:
        fail(exc)
    write_manifest(
        out,
        "stats",
        {
            "tables": wanted,
            "seed": seed,
            "top_genres": top_genres,
            "formats": fmt_list,
        },
        {"annotations": annotations, "pairs": pairs_path},
        [p.name for p in written + figures],
    )
    click.echo(f"wrote {len(written)} report files and {len(figures)} figures to {out}")


# ----------------------------------------------------------- classifier train


def _text_spec(kind_flag: str, cfg: dict, seed: int, features: str | None) -> TextEncoderSpec:
    kind = {"ngram": "ngram_bow", "recurrent": "recurrent_embedding", "precomputed": "precomputed"}[kind_flag]
    fields = {k: cfg[k] for k in ("ngram_min", "ngram_max", "vocab_size", "embedding_dim", "hidden_dim") if k in cfg}
    return TextEncoderSpec(kind=kind, seed=seed, feature_path=features, **fields)


def _image_spec(kind_flag: str, cfg: dict, features: str | None) -> ImageEncoderSpec | None:
    if kind_flag == "none":
        return None
    kind = {"fixture": "fixture_hash", "precomputed": "precomputed"}[kind_flag]
    fields = {k: cfg[k] for k in ("output_dim",) if k in cfg}
    return ImageEncoderSpec(kind=kind, feature_path=features, **fields)


def _split_dev(examples, dev_fraction: float, seed: int):
    if dev_fraction <= 0:
        return examples, []
    idx = list(range(len(examples)))
    random.Random(seed).shuffle(idx)
    n_dev = max(1, int(round(dev_fraction * len(examples))))
    dev_idx = set(idx[:n_dev])
    train = [ex for i, ex in enumerate(examples) if i not in dev_idx]
    dev = [ex for i, ex in enumerate(examples) if i in dev_idx]
    return train, dev


@main.command("train-classifier")
@click.option("--mode", required=True, type=click.Choice(["multi", "single"]))
@click.option("--text", "text_kind", required=True, type=click.Choice(["ngram", "recurrent", "precomputed"]))
@click.option("--image", "image_kind", default="none", show_default=True, type=click.Choice(["none", "fixture", "precomputed"]))
@click.option("--config", "config_path", type=click.Path(exists=True), help="JSON file; flags override its values.")
@click.option("--annotations", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--features", type=click.Path(exists=True), help="Feature JSONL for precomputed encoders.")
@click.option("--seed", type=int, default=None, help="Overrides the config seed.")
@click.option("--epochs", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--dev-fraction", default=0.0, show_default=True)
@click.option("--desk-preset", is_flag=True, help="Start from the small-scale preset instead of the full one.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def train_classifier_cmd(
    mode, text_kind, image_kind, config_path, annotations, pairs_path,
    features, seed, epochs, learning_rate, dev_fraction, desk_preset, out_dir,
):
    """Train the fusion relation classifier and write its checkpoint."""
    from .classify import train_classifier

    cfg_file = _read_json_config(config_path)
    mode_full = "single_label" if mode == "single" else "multi_label"
    base = ClassifierConfig(mode=mode_full)
    if desk_preset:
        base = base.desk_preset()
    cfg_fields = {f: getattr(base, f) for f in (
        "hidden_layers", "dropout_p", "optimizer", "learning_rate", "epochs", "batch_size", "seed",
    )}
    for key, value in cfg_file.items():
        if key in cfg_fields:
            cfg_fields[key] = tuple(value) if key == "hidden_layers" else value
    if seed is not None:
        cfg_fields["seed"] = seed
    if epochs is not None:
        cfg_fields["epochs"] = epochs
    if learning_rate is not None:
        cfg_fields["learning_rate"] = learning_rate

    out = Path(out_dir)
    try:
        config = ClassifierConfig(mode=mode_full, **cfg_fields)
        pairs = _load_pairs(pairs_path)
        store = load_annotations(annotations)
        table = load_feature_file(features) if features else None

        text_spec = _text_spec(text_kind, cfg_file, config.seed, features)
        captions = [p.caption for p in pairs]
        text_encoder = build_text_encoder(text_spec, train_captions=captions, table=table)
        image_spec = _image_spec(image_kind, cfg_file, features)
        image_encoder = build_image_encoder(image_spec, table=table) if image_spec else None

        examples = build_examples(
            pairs, store, text_encoder, image_encoder, mode=mode_full, seed=config.seed
        )
        train_set, dev_set = _split_dev(examples, dev_fraction, config.seed)
        model, log = train_classifier(config, train_set, dev_set)

        extra = {"text_encoder": asdict(text_spec), "image_encoder": asdict(image_spec) if image_spec else None}
        if text_spec.kind == "ngram_bow":
            vocabulary = text_encoder.vocabulary
        elif text_spec.kind == "recurrent_embedding":
            vocabulary = None
            extra["recurrent_tokens"] = sorted(text_encoder._token_index)
        else:
            vocabulary = None
        save_classifier(model, out, vocabulary=vocabulary, extra_meta=extra)
        (out / "train_log.txt").write_text(
            "".join(line + "\n" for line in log.as_lines()), encoding="utf-8"
        )
    except RUNTIME_ERRORS as exc:
        fail(exc)
    write_manifest(
        out,
        "train-classifier",
        {
            "mode": mode_full,
            "text": text_kind,
            "image": image_kind,
            "dev_fraction": dev_fraction,
            "classifier": asdict(config),
        },
        {"annotations": annotations, "pairs": pairs_path, "features": features,
         "config_file": config_path},
        ["weights.bin", "manifest.json", "train_log.txt"],
    )
    click.echo(f"trained on {len(train_set)} examples; checkpoint in {out}")


def _rebuild_encoders(meta: dict, features: str | None):
    text_cfg = dict(meta["text_encoder"])
    text_spec = TextEncoderSpec(**text_cfg)
    table = load_feature_file(features) if features else None
    if text_spec.kind == "ngram_bow":
        text_encoder = NgramBowEncoder.from_vocabulary(text_spec, meta["vocabulary"])
    elif text_spec.kind == "recurrent_embedding":
        # fitting on the stored token list reproduces the identical
        # token index and seeded module weights
        text_encoder = RecurrentTextEncoder(text_spec).fit(meta["recurrent_tokens"])
    else:
        text_encoder = build_text_encoder(text_spec, table=table)
    image_encoder = None
    if meta.get("image_encoder"):
        image_spec = ImageEncoderSpec(**meta["image_encoder"])
        image_encoder = build_image_encoder(image_spec, table=table)
    return text_encoder, image_encoder


@main.command("eval-classifier")
@click.option("--checkpoint", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--annotations", required=True, type=click.Path(exists=True))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--features", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def eval_classifier_cmd(checkpoint, annotations, pairs_path, features, out_dir):
    """Score a trained classifier checkpoint on an annotated corpus."""
    out = Path(out_dir)
    try:
        model, meta = load_classifier(checkpoint)
        text_encoder, image_encoder = _rebuild_encoders(meta, features)
        pairs = _load_pairs(pairs_path)
        store = load_annotations(annotations)
        examples = build_examples(
            pairs, store, text_encoder, image_encoder,
            mode=model.config.mode, seed=model.config.seed,
        )
        report = evaluate_classifier(model, examples)
        payload = {
            "n_examples": len(examples),
            "weighted_f1": report.weighted_f1,
            "per_class": {
                s.label: {"f1": s.f1, "precision": s.precision, "recall": s.recall, "support": s.support}
                for s in report.per_class
            },
        }
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "metrics.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except RUNTIME_ERRORS as exc:
        fail(exc)
    write_manifest(
        out,
        "eval-classifier",
        {"checkpoint": str(checkpoint)},
        {"annotations": annotations, "pairs": pairs_path, "features": features},
        ["metrics.json"],
    )
    click.echo(f"weighted F1 {payload['weighted_f1']:.4f} over {len(examples)} examples")


# ------------------------------------------------------------ captioner train


def _caption_labels(pairs, label_mode, annotations, classifier_dir, seed, features):
    """Per-pair conditioning label for captioner training."""
    if label_mode == "none":
        return {p.pair_id: None for p in pairs}
    if label_mode == "clue":
        if annotations is None:
            raise click.UsageError("--labels clue requires --annotations")
        merged = union_labels(load_annotations(annotations))
        labels = {}
        for p in pairs:
            if p.pair_id not in merged:
                continue
            rels, facets = merged[p.pair_id]
            rs = RelationSet(relations=frozenset(rels), facets=frozenset(facets))
            if rs.primary_relations():
                labels[p.pair_id] = map_to_single(rs, seed=seed)
        return labels
    if classifier_dir is None:
        raise click.UsageError("--labels predicted requires --classifier")
    from .classify.model import EncodedExample, classify_forward

    model, meta = load_classifier(classifier_dir)
    text_encoder, image_encoder = _rebuild_encoders(meta, features)
    labels = {}
    for p in pairs:
        text_vec = text_encoder.encode_pair(p)
        image_vec = (
            image_encoder.encode_pair(p) if image_encoder is not None
            else np.zeros(0, dtype=np.float32)
        )
        ex = EncodedExample(pair_id=p.pair_id, text_vec=text_vec, image_vec=image_vec, target=0)
        # most probable class under either output head
        scores = classify_forward(model, [ex])[0]
        labels[p.pair_id] = parse_label(CLASS_LABELS[int(np.argmax(scores))])
    return labels


@main.command("train-captioner")
@click.option("--labels", "label_mode", required=True, type=click.Choice(["clue", "predicted", "none"]))
@click.option("--preset", required=True, type=click.Choice(["paper", "desk"]))
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--features", required=True, type=click.Path(exists=True), help="Feature JSONL with image vectors per pair.")
@click.option("--annotations", type=click.Path(exists=True), help="Needed for --labels clue.")
@click.option("--classifier", "classifier_dir", type=click.Path(exists=True, file_okay=False), help="Needed for --labels predicted.")
@click.option("--config", "config_path", type=click.Path(exists=True), help="JSON overrides for the model preset.")
@click.option("--merges", default=200, show_default=True)
@click.option("--epochs", default=10, show_default=True)
@click.option("--learning-rate", default=1e-3, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--val-fraction", default=0.0, show_default=True)
@click.option("--checkpoint-every", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def train_captioner_cmd(
    label_mode, preset, pairs_path, features, annotations, classifier_dir,
    config_path, merges, epochs, learning_rate, seed, val_fraction,
    checkpoint_every, out_dir,
):
    """Train the label-conditioned captioner and write its checkpoint.

    Conditioning labels come from gold annotations (clue), a trained
    classifier (predicted), or are omitted entirely (none).
    """
    out = Path(out_dir)
    try:
        pairs = _load_pairs(pairs_path)
        table = load_feature_file(features)
        overrides = _read_json_config(config_path)
        overrides.setdefault("seed", seed)
        overrides.setdefault("image_dim", len(table.image_vec(pairs[0].pair_id)))
        config = (
            CaptionerConfig.paper_preset(**overrides)
            if preset == "paper"
            else CaptionerConfig.desk_preset(**overrides)
        )
        labels = _caption_labels(pairs, label_mode, annotations, classifier_dir, seed, features)
        usable = [p for p in pairs if p.pair_id in labels]
        if not usable:
            raise CorpusError("no pair has both features and a usable label")
        vocab = build_vocab([p.caption for p in usable], merges=merges)
        batches = [
            CaptionerBatch(
                image_vec=np.asarray(table.image_vec(p.pair_id), dtype=np.float32),
                object_vecs=[],
                coherence_label=labels[p.pair_id],
                target_ids=vocab.encode(p.caption),
            )
            for p in usable
        ]
        n_val = int(round(val_fraction * len(batches)))
        val_batches = batches[:n_val]
        model, log = train_captioner(
            config,
            batches,
            vocab,
            epochs=epochs,
            learning_rate=learning_rate,
            val_batches=val_batches,
            checkpoint_every=checkpoint_every,
        )
        save_captioner(model, out, extra_meta={"label_mode": label_mode, "preset": preset})
        log_payload = {
            "epochs": [{"epoch": e.epoch, "mean_loss": e.mean_loss} for e in log.epochs],
            "checkpoint_scores": log.checkpoint_scores,
            "best_step": log.best_step,
        }
        with open(out / "train_log.json", "w", encoding="utf-8") as fh:
            json.dump(log_payload, fh, indent=2)
            fh.write("\n")
    except RUNTIME_ERRORS as exc:
        fail(exc)
    write_manifest(
        out,
        "train-captioner",
        {
            "labels": label_mode,
            "preset": preset,
            "merges": merges,
            "epochs": epochs,
            "learning_rate": learning_rate,
            "seed": seed,
            "val_fraction": val_fraction,
            "captioner": asdict(config),
        },
        {"pairs": pairs_path, "features": features, "annotations": annotations,
         "classifier_config": config_path},
        ["weights.bin", "manifest.json", "train_log.json"],
    )
    click.echo(f"trained on {len(batches)} captions; checkpoint in {out}")


# ------------------------------------------------------------------- generate


@main.command()
@click.option("--checkpoint", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--label", default=None, help="Conditioning relation, e.g. Visible; omit for label-agnostic decoding.")
@click.option("--image", "image_ref", default=None, help="Image reference hashed into a feature vector.")
@click.option("--features", type=click.Path(exists=True), help="Feature JSONL, used with --pair-id.")
@click.option("--pair-id", default=None)
@click.option("--decode", default="greedy", show_default=True, type=click.Choice(["greedy", "beam"]))
@click.option("--beam-size", default=4, show_default=True)
@click.option("--length-norm", default=1.0, show_default=True)
def generate(checkpoint, label, image_ref, features, pair_id, decode, beam_size, length_norm):
    """Decode one caption from a captioner checkpoint."""
    if (image_ref is None) == (features is None or pair_id is None):
        raise click.UsageError("provide either --image, or --features with --pair-id")
    try:
        model, _ = load_captioner(checkpoint)
        relation = parse_label(label) if label else None
        if image_ref is not None:
            from .classify.encoders import hash_vector

            image_vec = hash_vector(image_ref.encode("utf-8"), model.config.image_dim)
        else:
            table = load_feature_file(features)
            image_vec = np.asarray(table.image_vec(pair_id), dtype=np.float32)
        result = generate_caption(
            model, image_vec, [], relation,
            decode=decode, beam_size=beam_size, length_norm=length_norm,
        )
    except RUNTIME_ERRORS as exc:
        fail(exc)
    click.echo(result.text)


# ---------------------------------------------------------------------- score


@main.command()
@click.option("--candidates", required=True, type=click.Path(exists=True), help="One caption per line.")
@click.option("--references", required=True, type=click.Path(exists=True), help="Tab-separated references per line.")
@click.option("--variant", default="cider", show_default=True, type=click.Choice(["cider", "cider-d"]))
@click.option("--out", "out_dir", default=None, type=click.Path(file_okay=False))
def score(candidates, references, variant, out_dir):
    """Consensus caption score of candidates against references."""
    try:
        cand_lines = Path(candidates).read_text(encoding="utf-8").splitlines()
        ref_lines = Path(references).read_text(encoding="utf-8").splitlines()
        if len(cand_lines) != len(ref_lines):
            raise CorpusError(
                f"{len(cand_lines)} candidates but {len(ref_lines)} reference lines"
            )
        refs = [line.split("\t") for line in ref_lines]
        result = cider_score(cand_lines, refs, variant=variant)
    except RUNTIME_ERRORS as exc:
        fail(exc)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "scores.json", "w", encoding="utf-8") as fh:
            json.dump(
                {"variant": variant, "corpus_score": result.corpus_score,
                 "per_example": result.per_example},
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
        write_manifest(
            out, "score", {"variant": variant},
            {"candidates": candidates, "references": references},
            ["scores.json"],
        )
    click.echo(f"{variant} corpus score: {result.corpus_score:.4f}")


# ---------------------------------------------------------------------- serve


def build_service(pairs_path, annotators, overlap, seed, store_path, static_dir):
    """Assemble the annotation app from files; shared by serve and tests."""
    pairs = _load_pairs(pairs_path)
    plan = plan_assignments(pairs, annotators, overlap_count=overlap, seed=seed)
    store = load_annotations(store_path)
    return create_app(pairs, plan, store, static_dir=static_dir)


@main.command()
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True))
@click.option("--annotators", required=True, help="Comma-separated annotator ids.")
@click.option("--overlap", default=0, show_default=True, help="Pairs assigned to the first two annotators for agreement.")
@click.option("--seed", default=0, show_default=True)
@click.option("--store", "store_path", required=True, type=click.Path(), help="Annotation JSONL, appended durably.")
@click.option("--static-dir", type=click.Path(exists=True, file_okay=False), help="Built web UI to mount at /ui.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8700, show_default=True)
def serve(pairs_path, annotators, overlap, seed, store_path, static_dir, host, port):
    """Run the annotation HTTP service."""
    import uvicorn

    names = [a.strip() for a in annotators.split(",") if a.strip()]
    try:
        app = build_service(pairs_path, names, overlap, seed, store_path, static_dir)
    except RUNTIME_ERRORS as exc:
        fail(exc)
    click.echo(f"serving {len(app.state.service.pairs)} pairs for {names} on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())

"""Training and evaluation for the fusion classifier, plus the linear
SVM baseline and the bridge from annotated pairs to encoded examples.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import torch
import torch.nn as nn

from ..core import AnnotationRecord, CoherenceRelation, ImageCaptionPair, RelationSet
from ..evaluate.stats import union_labels
from ..labelmap import map_to_single
from .model import (
    CLASS_INDEX,
    CLASS_LABELS,
    N_CLASSES,
    ClassifierConfig,
    EncodedExample,
    EpochStats,
    FusionClassifier,
    TrainingLog,
    classify_forward,
)


class EmptyDatasetError(ValueError):
    pass


class NonFiniteLossError(RuntimeError):
    pass


def build_examples(
    pairs: Sequence[ImageCaptionPair],
    annotations: Iterable[AnnotationRecord],
    text_encoder,
    image_encoder=None,
    mode: str = "single_label",
    seed: int = 0,
) -> list[EncodedExample]:
    """Encode annotated pairs into classifier examples.

    Targets come from the per-pair union of annotator relation sets:
    single-label mode collapses the union with the deterministic mapping
    heuristic, multi-label mode keeps the 0/1 vector over the six
    primary relations. Pairs whose union holds no primary relation
    (Other-* only) are skipped; unannotated pairs are skipped.
    """
    merged = union_labels(annotations)
    by_id = {p.pair_id: p for p in pairs}
    examples: list[EncodedExample] = []
    for pair_id in sorted(merged):
        if pair_id not in by_id:
            continue
        rels, facets = merged[pair_id]
        rs = RelationSet(relations=frozenset(rels), facets=frozenset(facets))
        primaries = rs.primary_relations()
        if not primaries:
            continue
        if mode == "single_label":
            target: int | np.ndarray = CLASS_INDEX[map_to_single(rs, seed=seed)]
        else:
            vec = np.zeros(N_CLASSES, dtype=np.float32)
            for rel in primaries:
                vec[CLASS_INDEX[rel]] = 1.0
            target = vec
        pair = by_id[pair_id]
        text_vec = text_encoder.encode_pair(pair)
        image_vec = (
            image_encoder.encode_pair(pair)
            if image_encoder is not None
            else np.zeros(0, dtype=np.float32)
        )
        examples.append(
            EncodedExample(pair_id=pair_id, text_vec=text_vec, image_vec=image_vec, target=target)
        )
    return examples


def _targets_tensor(examples: Sequence[EncodedExample], mode: str) -> torch.Tensor:
    if mode == "single_label":
        return torch.tensor([int(ex.target) for ex in examples], dtype=torch.long)
    return torch.tensor(np.stack([ex.target for ex in examples]), dtype=torch.float32)


def _features_tensor(examples: Sequence[EncodedExample]) -> torch.Tensor:
    return torch.tensor(np.stack([ex.fused() for ex in examples]), dtype=torch.float32)


def train_classifier(
    config: ClassifierConfig,
    train_set: Sequence[EncodedExample],
    dev_set: Sequence[EncodedExample] = (),
) -> tuple[FusionClassifier, TrainingLog]:
    """Minibatch Adam training with best-dev checkpoint selection.

    The returned model carries the weights of the epoch with the best
    dev weighted F1 (earliest epoch on ties); without a dev set the
    final weights stand. Everything downstream of the seed is
    deterministic on one platform: a single compute thread is forced
    during the run so reduction order cannot vary.
    """
    if not train_set:
        raise EmptyDatasetError("training set is empty")
    input_dim = train_set[0].fused().shape[0]

    n_threads = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        torch.manual_seed(config.seed)
        model = FusionClassifier(input_dim, config)
        optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
        loss_fn: nn.Module
        if config.mode == "single_label":
            loss_fn = nn.CrossEntropyLoss()
        else:
            loss_fn = nn.BCEWithLogitsLoss(reduction="sum")

        features = _features_tensor(train_set)
        targets = _targets_tensor(train_set, config.mode)
        shuffler = torch.Generator().manual_seed(config.seed)

        log = TrainingLog(config=config, input_dim=input_dim)
        best_f1 = -1.0
        best_state = None

        for epoch in range(config.epochs):
            model.train()
            order = torch.randperm(len(train_set), generator=shuffler)
            total_loss = 0.0
            for start in range(0, len(train_set), config.batch_size):
                idx = order[start : start + config.batch_size]
                optimizer.zero_grad()
                logits = model(features[idx])
                loss = loss_fn(logits, targets[idx])
                value = float(loss.item())
                if not math.isfinite(value):
                    raise NonFiniteLossError(
                        f"loss {value} at epoch {epoch}, batch starting {start} "
                        f"(lr={config.learning_rate}, mode={config.mode})"
                    )
                loss.backward()
                optimizer.step()
                # CE reports a batch mean, summed BCE already a batch sum
                total_loss += value * len(idx) if config.mode == "single_label" else value
            mean_loss = total_loss / len(train_set)

            dev_f1 = None
            if dev_set:
                dev_f1 = evaluate_classifier(model, dev_set).weighted_f1
                if dev_f1 > best_f1:
                    best_f1 = dev_f1
                    best_state = copy.deepcopy(model.state_dict())
                    log.best_epoch = epoch
            log.epochs.append(EpochStats(epoch=epoch, train_loss=mean_loss, dev_weighted_f1=dev_f1))

        if best_state is not None:
            model.load_state_dict(best_state)
        model.eval()
        return model, log
    finally:
        torch.set_num_threads(n_threads)


@dataclass
class ClassF1:
    label: str
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvaluationReport:
    mode: str
    per_class: list[ClassF1]
    weighted_f1: float
    confusion: np.ndarray
    """single_label: 6x6 counts, rows gold / columns predicted;
    multi_label: 6x4 counts of (tp, fp, fn, tn) per label."""

    def f1(self, label: str) -> float:
        for c in self.per_class:
            if c.label == label:
                return c.f1
        raise KeyError(label)


def _binary_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def scores_from_predictions(
    golds: np.ndarray, preds: np.ndarray, mode: str = "single_label"
) -> EvaluationReport:
    """F1 report from gold/predicted targets.

    Single-label inputs are class-index arrays; multi-label inputs are
    0/1 matrices with one column per relation. Weighted F1 weights each
    class by its gold support.
    """
    per_class: list[ClassF1] = []
    if mode == "single_label":
        confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        for g, p in zip(golds, preds):
            confusion[int(g), int(p)] += 1
        for i, label in enumerate(CLASS_LABELS):
            tp = int(confusion[i, i])
            fp = int(confusion[:, i].sum()) - tp
            fn = int(confusion[i, :].sum()) - tp
            precision, recall, f1 = _binary_f1(tp, fp, fn)
            per_class.append(ClassF1(label, precision, recall, f1, support=tp + fn))
    else:
        confusion = np.zeros((N_CLASSES, 4), dtype=np.int64)
        for i, label in enumerate(CLASS_LABELS):
            g = golds[:, i].astype(bool)
            p = preds[:, i].astype(bool)
            tp = int((g & p).sum())
            fp = int((~g & p).sum())
            fn = int((g & ~p).sum())
            tn = int((~g & ~p).sum())
            confusion[i] = (tp, fp, fn, tn)
            precision, recall, f1 = _binary_f1(tp, fp, fn)
            per_class.append(ClassF1(label, precision, recall, f1, support=tp + fn))
    total_support = sum(c.support for c in per_class)
    weighted = (
        sum(c.f1 * c.support for c in per_class) / total_support if total_support else 0.0
    )
    return EvaluationReport(mode=mode, per_class=per_class, weighted_f1=weighted, confusion=confusion)


def predict_classes(model: FusionClassifier, examples: Sequence[EncodedExample]) -> np.ndarray:
    """Hard predictions: argmax (ties -> lowest class index) in
    single-label mode, threshold 0.5 per label in multi-label mode."""
    scores = classify_forward(model, list(examples))
    if model.config.mode == "single_label":
        return np.argmax(scores, axis=1)
    return (scores >= 0.5).astype(np.int64)


def evaluate_classifier(model: FusionClassifier, test_set: Sequence[EncodedExample]) -> EvaluationReport:
    if not test_set:
        raise EmptyDatasetError("test set is empty")
    preds = predict_classes(model, test_set)
    if model.config.mode == "single_label":
        golds = np.array([int(ex.target) for ex in test_set])
    else:
        golds = np.stack([np.asarray(ex.target) for ex in test_set])
    return scores_from_predictions(golds, preds, mode=model.config.mode)


@dataclass
class SvmBaseline:
    """One-vs-rest linear hinge-loss classifier over the fused features."""

    models: list
    classes_present: list[int]

    def predict(self, examples: Sequence[EncodedExample]) -> np.ndarray:
        if not self.models:  # degenerate single-class training data
            return np.full(len(examples), self.classes_present[0], dtype=np.int64)
        features = np.stack([ex.fused() for ex in examples])
        margins = np.full((len(examples), N_CLASSES), -np.inf)
        for ci, clf in zip(self.classes_present, self.models):
            margins[:, ci] = clf.decision_function(features)
        return np.argmax(margins, axis=1)


def train_svm_baseline(train_set: Sequence[EncodedExample], c: float = 1.0, seed: int = 0) -> SvmBaseline:
    from sklearn.svm import LinearSVC

    if not train_set:
        raise EmptyDatasetError("training set is empty")
    features = np.stack([ex.fused() for ex in train_set])
    golds = np.array([int(ex.target) for ex in train_set])
    classes_present = sorted(set(int(g) for g in golds))
    if len(classes_present) == 1:
        return SvmBaseline(models=[], classes_present=classes_present)
    models = []
    for ci in classes_present:
        clf = LinearSVC(C=c, loss="hinge", max_iter=20000, random_state=seed)
        clf.fit(features, (golds == ci).astype(np.int64))
        models.append(clf)
    return SvmBaseline(models=models, classes_present=classes_present)


def evaluate_svm(baseline: SvmBaseline, test_set: Sequence[EncodedExample]) -> EvaluationReport:
    if not test_set:
        raise EmptyDatasetError("test set is empty")
    preds = baseline.predict(test_set)
    golds = np.array([int(ex.target) for ex in test_set])
    return scores_from_predictions(golds, preds, mode="single_label")

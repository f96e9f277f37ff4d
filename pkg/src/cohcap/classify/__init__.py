"""Coherence-relation prediction: encoders, fusion classifier, training."""

from .encoders import (
    FixtureHashImageEncoder,
    ImageEncoderSpec,
    NgramBowEncoder,
    PrecomputedImageEncoder,
    PrecomputedTextEncoder,
    RecurrentTextEncoder,
    TextEncoderSpec,
    build_image_encoder,
    build_text_encoder,
    encode_image,
    encode_text,
    hash_vector,
)
from .io import load_classifier, save_classifier
from .model import (
    CLASS_INDEX,
    CLASS_LABELS,
    N_CLASSES,
    ClassifierConfig,
    DimensionMismatchError,
    EncodedExample,
    FusionClassifier,
    TrainingLog,
    classify_forward,
)
from .train import (
    EmptyDatasetError,
    EvaluationReport,
    NonFiniteLossError,
    build_examples,
    evaluate_classifier,
    evaluate_svm,
    predict_classes,
    scores_from_predictions,
    train_classifier,
    train_svm_baseline,
)

__all__ = [
    "CLASS_INDEX",
    "CLASS_LABELS",
    "N_CLASSES",
    "ClassifierConfig",
    "DimensionMismatchError",
    "EmptyDatasetError",
    "EncodedExample",
    "EvaluationReport",
    "FixtureHashImageEncoder",
    "FusionClassifier",
    "ImageEncoderSpec",
    "NgramBowEncoder",
    "NonFiniteLossError",
    "PrecomputedImageEncoder",
    "PrecomputedTextEncoder",
    "RecurrentTextEncoder",
    "TextEncoderSpec",
    "TrainingLog",
    "build_examples",
    "build_image_encoder",
    "build_text_encoder",
    "classify_forward",
    "encode_image",
    "encode_text",
    "evaluate_classifier",
    "evaluate_svm",
    "hash_vector",
    "load_classifier",
    "predict_classes",
    "save_classifier",
    "scores_from_predictions",
    "train_classifier",
    "train_svm_baseline",
]

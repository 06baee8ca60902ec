"""Pointer-network encoder-decoder for aspect sentiment triplet extraction."""

from .corpus import (
    AnnotatedSentence,
    Annotator,
    MappingAnnotator,
    StatisticsReport,
    Vocabulary,
    annotate,
    build_vocab,
    compute_statistics,
    export_canonical,
    import_dataset,
)
from .decoding import SpanSelection, decode_triplets, predict_corpus, select_spans
from .metrics import (
    EvalReport,
    build_eval_report,
    score_elements,
    score_exact_match,
    split_scores,
)
from .model import DecoderStepOutput, ModelConfig, TripletExtractionModel, make_batch
from .training import (
    TargetStep,
    TrainConfig,
    build_target_sequence,
    compute_loss,
    gradient_check,
    train,
)
from .triplets import (
    GenerationDirection,
    OpinionTriplet,
    SentenceFlags,
    SentimentLabel,
    classify_sentence,
    sort_targets,
    validate_triplet,
)

__all__ = [
    "AnnotatedSentence",
    "Annotator",
    "DecoderStepOutput",
    "EvalReport",
    "GenerationDirection",
    "MappingAnnotator",
    "ModelConfig",
    "OpinionTriplet",
    "SentenceFlags",
    "SentimentLabel",
    "SpanSelection",
    "StatisticsReport",
    "TargetStep",
    "TrainConfig",
    "TripletExtractionModel",
    "Vocabulary",
    "annotate",
    "build_eval_report",
    "build_target_sequence",
    "build_vocab",
    "classify_sentence",
    "compute_loss",
    "compute_statistics",
    "decode_triplets",
    "export_canonical",
    "gradient_check",
    "import_dataset",
    "make_batch",
    "predict_corpus",
    "score_elements",
    "score_exact_match",
    "select_spans",
    "sort_targets",
    "split_scores",
    "train",
    "validate_triplet",
]

"""Exact-match scoring: overall, per sentence category, per triplet element.

A predicted triplet counts as a true positive only when all five fields
equal a gold triplet's. Scores are micro-averaged: counts are pooled over
the corpus before precision/recall are formed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .corpus import AnnotatedSentence
from .triplets import OpinionTriplet, SentenceFlags

SPLIT_NAMES = ("Single", "Multi", "MultiPol", "Overlap")


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _prf(tp: int, num_pred: int, num_gold: int) -> tuple[float, float, float]:
    precision = tp / num_pred if num_pred else 0.0
    recall = tp / num_gold if num_gold else 0.0
    return precision, recall, f1_score(precision, recall)


def _dedup(triplets: Sequence[OpinionTriplet]) -> set[OpinionTriplet]:
    return set(triplets)


def score_exact_match(
    predictions: Sequence[Sequence[OpinionTriplet]],
    gold: Sequence[Sequence[OpinionTriplet]],
) -> tuple[float, float, float]:
    """Micro precision/recall/F1 over exact 5-tuple matches."""
    if len(predictions) != len(gold):
        raise ValueError("predictions and gold are misaligned")
    tp = num_pred = num_gold = 0
    for pred_s, gold_s in zip(predictions, gold):
        pred_set = _dedup(pred_s)
        gold_set = _dedup(gold_s)
        tp += len(pred_set & gold_set)
        num_pred += len(pred_set)
        num_gold += len(gold_set)
    return _prf(tp, num_pred, num_gold)


@dataclass(frozen=True)
class ElementScores:
    """Span-level aspect/opinion scores and sentiment accuracy.

    Sentiment accuracy is measured over predicted triplets whose (aspect,
    opinion) span pair matches a gold pair, isolating sentiment quality from
    span quality; it is 0.0 when no predicted pair matches.
    """

    aspect: tuple[float, float, float]
    opinion: tuple[float, float, float]
    sentiment_accuracy: float


def score_elements(
    predictions: Sequence[Sequence[OpinionTriplet]],
    gold: Sequence[Sequence[OpinionTriplet]],
) -> ElementScores:
    if len(predictions) != len(gold):
        raise ValueError("predictions and gold are misaligned")
    counts = {
        "aspect": [0, 0, 0],  # tp, num_pred, num_gold
        "opinion": [0, 0, 0],
    }
    senti_correct = senti_total = 0
    for pred_s, gold_s in zip(predictions, gold):
        pred_set = _dedup(pred_s)
        gold_set = _dedup(gold_s)
        for element, span_of in (
            ("aspect", lambda t: t.aspect_span),
            ("opinion", lambda t: t.opinion_span),
        ):
            pred_spans = {span_of(t) for t in pred_set}
            gold_spans = {span_of(t) for t in gold_set}
            counts[element][0] += len(pred_spans & gold_spans)
            counts[element][1] += len(pred_spans)
            counts[element][2] += len(gold_spans)
        gold_pairs = {
            (t.aspect_span, t.opinion_span): t.sentiment for t in gold_set
        }
        for triplet in pred_set:
            pair = (triplet.aspect_span, triplet.opinion_span)
            if pair in gold_pairs:
                senti_total += 1
                senti_correct += gold_pairs[pair] is triplet.sentiment
    return ElementScores(
        aspect=_prf(*counts["aspect"]),
        opinion=_prf(*counts["opinion"]),
        sentiment_accuracy=senti_correct / senti_total if senti_total else 0.0,
    )


def split_scores(
    predictions: Sequence[Sequence[OpinionTriplet]],
    gold: Sequence[Sequence[OpinionTriplet]],
    flags: Sequence[SentenceFlags],
) -> dict[str, float | None]:
    """Micro-F1 restricted to each sentence category; None for empty splits."""
    if not (len(predictions) == len(gold) == len(flags)):
        raise ValueError("predictions, gold and flags are misaligned")
    members = {
        "Single": lambda f: f.is_single,
        "Multi": lambda f: f.is_multi,
        "MultiPol": lambda f: f.is_multipol,
        "Overlap": lambda f: f.is_overlap,
    }
    result: dict[str, float | None] = {}
    for name in SPLIT_NAMES:
        keep = [i for i, f in enumerate(flags) if members[name](f)]
        if not keep:
            result[name] = None
            continue
        _, _, f1 = score_exact_match(
            [predictions[i] for i in keep], [gold[i] for i in keep]
        )
        result[name] = f1
    return result


@dataclass
class EvalReport:
    """Complete evaluation: overall, per category, per element."""

    precision: float
    recall: float
    f1: float
    split_f1: dict[str, float | None]
    aspect: tuple[float, float, float]
    opinion: tuple[float, float, float]
    sentiment_accuracy: float
    num_sentences: int = 0

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "splits": dict(self.split_f1),
            "aspect": {
                "precision": self.aspect[0],
                "recall": self.aspect[1],
                "f1": self.aspect[2],
            },
            "opinion": {
                "precision": self.opinion[0],
                "recall": self.opinion[1],
                "f1": self.opinion[2],
            },
            "sentiment_accuracy": self.sentiment_accuracy,
            "num_sentences": self.num_sentences,
        }

    def to_text(self) -> str:
        lines = [
            f"{'':<12}{'P.':>8}{'R.':>8}{'F1':>8}",
            f"{'Triplet':<12}{self.precision:>8.3f}{self.recall:>8.3f}{self.f1:>8.3f}",
            f"{'Aspect':<12}{self.aspect[0]:>8.3f}{self.aspect[1]:>8.3f}{self.aspect[2]:>8.3f}",
            f"{'Opinion':<12}{self.opinion[0]:>8.3f}{self.opinion[1]:>8.3f}{self.opinion[2]:>8.3f}",
            f"{'Sentiment':<12}{'% Acc.':>8} {self.sentiment_accuracy:>7.3f}",
            "",
            "F1 by sentence category",
        ]
        for name in SPLIT_NAMES:
            value = self.split_f1.get(name)
            shown = f"{value:.3f}" if value is not None else "absent"
            lines.append(f"{name:<12}{shown:>8}")
        return "\n".join(lines)


def build_eval_report(
    predictions: Sequence[Sequence[OpinionTriplet]],
    sentences: Sequence[AnnotatedSentence],
) -> EvalReport:
    gold = [list(s.gold) for s in sentences]
    flags = [s.flags for s in sentences]
    precision, recall, f1 = score_exact_match(predictions, gold)
    elements = score_elements(predictions, gold)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        split_f1=split_scores(predictions, gold, flags),
        aspect=elements.aspect,
        opinion=elements.opinion,
        sentiment_accuracy=elements.sentiment_accuracy,
        num_sentences=len(sentences),
    )

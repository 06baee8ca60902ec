"""Constrained span selection and triplet decoding at inference time.

Span selection is a two-phase greedy argmax: pick the best span for one
entity from its start/end pointer distributions, then the best span for the
other entity among spans disjoint from the first; run both orders and keep
the one whose four chosen probabilities multiply higher. The first entity's
argmax never considers the full-sentence span, so a disjoint partner always
exists for sentences of length >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch

from .corpus import AnnotatedSentence, Vocabulary
from .model import TripletExtractionModel, make_batch
from .triplets import SENTIMENT_ORDER, OpinionTriplet, SentimentLabel


@dataclass(frozen=True)
class SpanSelection:
    """A disjoint (aspect, opinion) span pair and its probability product."""

    aspect: tuple[int, int]
    opinion: tuple[int, int]
    score: float


def _best_span(
    start_probs: np.ndarray,
    end_probs: np.ndarray,
    exclude: tuple[int, int] | None = None,
    forbid_full: bool = False,
) -> tuple[tuple[int, int], float]:
    """Argmax of start*end over spans start<=end, earliest span on ties.

    ``exclude`` removes spans intersecting the given one; ``forbid_full``
    removes the span covering the whole sentence.
    """
    n = start_probs.shape[0]
    products = np.outer(start_probs, end_probs)
    starts = np.arange(n)[:, None]
    ends = np.arange(n)[None, :]
    valid = starts <= ends
    if forbid_full and n > 1:
        valid[0, n - 1] = False
    if exclude is not None:
        left, right = exclude
        valid &= (ends < left) | (starts > right)
    if not valid.any():
        raise ValueError("no feasible span under the given constraints")
    products = np.where(valid, products, -1.0)
    flat = int(np.argmax(products))  # row-major: earliest (start, end) wins ties
    span = (flat // n, flat % n)
    return span, float(products[span])


def select_spans(
    aspect_start: np.ndarray,
    aspect_end: np.ndarray,
    opinion_start: np.ndarray,
    opinion_end: np.ndarray,
) -> SpanSelection:
    """Best disjoint (aspect, opinion) pair under the two-phase greedy rule.

    Phase A fixes the aspect span first, phase B the opinion span first; the
    phase with the higher probability product wins, phase A on ties.
    """
    vectors = [
        np.asarray(v, dtype=np.float64)
        for v in (aspect_start, aspect_end, opinion_start, opinion_end)
    ]
    n = vectors[0].shape[0]
    if any(v.shape != (n,) for v in vectors):
        raise ValueError("pointer vectors must share one length")
    if n < 2:
        raise ValueError("disjoint spans need a sentence of length >= 2")
    a_start, a_end, o_start, o_end = vectors

    aspect_a, ap = _best_span(a_start, a_end, forbid_full=True)
    opinion_a, op = _best_span(o_start, o_end, exclude=aspect_a)
    score_a = ap * op

    opinion_b, op_b = _best_span(o_start, o_end, forbid_full=True)
    aspect_b, ap_b = _best_span(a_start, a_end, exclude=opinion_b)
    score_b = ap_b * op_b

    if score_b > score_a:
        return SpanSelection(aspect=aspect_b, opinion=opinion_b, score=score_b)
    return SpanSelection(aspect=aspect_a, opinion=opinion_a, score=score_a)


def _triplet_from_step(
    aspect_start: np.ndarray,
    aspect_end: np.ndarray,
    opinion_start: np.ndarray,
    opinion_end: np.ndarray,
    sentiment_probs: np.ndarray,
) -> OpinionTriplet:
    selection = select_spans(aspect_start, aspect_end, opinion_start, opinion_end)
    label = SENTIMENT_ORDER[int(np.argmax(sentiment_probs))]
    return OpinionTriplet(
        aspect_start=selection.aspect[0],
        aspect_end=selection.aspect[1],
        opinion_start=selection.opinion[0],
        opinion_end=selection.opinion[1],
        sentiment=label,
    )


def predict_corpus(
    model: TripletExtractionModel,
    vocab: Vocabulary,
    sentences: Sequence[AnnotatedSentence],
    max_steps: int | None = None,
    batch_size: int = 32,
) -> list[list[OpinionTriplet]]:
    """Decode every sentence; stops at the first NONE, drops duplicates."""
    if max_steps is None:
        max_steps = model.config.max_steps
    if max_steps is None:
        raise ValueError("max_steps not set on the model config nor passed in")
    model.eval()
    predictions: list[list[OpinionTriplet]] = []
    with torch.no_grad():
        for offset in range(0, len(sentences), batch_size):
            chunk = list(sentences[offset : offset + batch_size])
            batch = make_batch(chunk, vocab)
            outputs = model(batch, steps=max_steps)
            for b, sentence in enumerate(chunk):
                n = len(sentence)
                triplets: list[OpinionTriplet] = []
                seen: set[OpinionTriplet] = set()
                for out in outputs:
                    triplet = _triplet_from_step(
                        out.aspect_start_probs[b, :n].cpu().numpy(),
                        out.aspect_end_probs[b, :n].cpu().numpy(),
                        out.opinion_start_probs[b, :n].cpu().numpy(),
                        out.opinion_end_probs[b, :n].cpu().numpy(),
                        out.sentiment_probs[b].cpu().numpy(),
                    )
                    if triplet.sentiment is SentimentLabel.NONE:
                        break
                    if triplet not in seen:
                        seen.add(triplet)
                        triplets.append(triplet)
                predictions.append(triplets)
    return predictions


def decode_triplets(
    model: TripletExtractionModel,
    vocab: Vocabulary,
    sentence: AnnotatedSentence,
    max_steps: int | None = None,
) -> list[OpinionTriplet]:
    """Extract the triplet set for one sentence."""
    return predict_corpus(model, vocab, [sentence], max_steps=max_steps)[0]

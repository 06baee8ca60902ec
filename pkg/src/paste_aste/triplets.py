"""Position-based opinion triplets: validation, ordering, sentence classification.

A triplet is a 5-point tuple over token positions: start/end of the aspect
span, start/end of the opinion span (all 0-based, end inclusive), plus the
sentiment connecting them. Spans of one triplet never overlap each other,
which is what makes the representation decodable by start/end pointers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class SentimentLabel(str, Enum):
    """Sentiment polarity; NONE is the decoder's stop sentinel, never gold."""

    POS = "POS"
    NEG = "NEG"
    NEU = "NEU"
    NONE = "NONE"


#: The three labels that may appear in gold data, in classifier index order.
GOLD_SENTIMENTS = (SentimentLabel.POS, SentimentLabel.NEG, SentimentLabel.NEU)

#: Full classifier label order, index 3 reserved for the stop sentinel.
SENTIMENT_ORDER = (
    SentimentLabel.POS,
    SentimentLabel.NEG,
    SentimentLabel.NEU,
    SentimentLabel.NONE,
)

SENTIMENT_TO_INDEX = {label: i for i, label in enumerate(SENTIMENT_ORDER)}


class GenerationDirection(str, Enum):
    """Which entity the first pointer network detects."""

    ASPECT_FIRST = "af"
    OPINION_FIRST = "of"

    @classmethod
    def parse(cls, value: str) -> "GenerationDirection":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(
                f"unknown generation direction {value!r}; expected 'af' or 'of'"
            ) from None


class TripletValidationError(ValueError):
    """A triplet violates a well-formedness invariant; message names it."""


@dataclass(frozen=True, order=True)
class OpinionTriplet:
    """(aspect start, aspect end, opinion start, opinion end, sentiment)."""

    aspect_start: int
    aspect_end: int
    opinion_start: int
    opinion_end: int
    sentiment: SentimentLabel

    @property
    def aspect_span(self) -> tuple[int, int]:
        return (self.aspect_start, self.aspect_end)

    @property
    def opinion_span(self) -> tuple[int, int]:
        return (self.opinion_start, self.opinion_end)

    def as_tuple(self) -> tuple[int, int, int, int, str]:
        return (
            self.aspect_start,
            self.aspect_end,
            self.opinion_start,
            self.opinion_end,
            self.sentiment.value,
        )

    @classmethod
    def from_tuple(cls, values: tuple) -> "OpinionTriplet":
        a_start, a_end, o_start, o_end, sentiment = values
        return cls(
            int(a_start),
            int(a_end),
            int(o_start),
            int(o_end),
            SentimentLabel(sentiment),
        )


@dataclass(frozen=True)
class SentenceFlags:
    """Sentence category by triplet count, polarity diversity, span sharing.

    multipol and overlap imply multi; single and multi are mutually exclusive.
    """

    is_single: bool
    is_multi: bool
    is_multipol: bool
    is_overlap: bool


def spans_disjoint(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """True iff the inclusive index ranges share no position."""
    return a[1] < b[0] or b[1] < a[0]


def validate_triplet(triplet: OpinionTriplet, sentence_length: int) -> None:
    """Raise TripletValidationError unless ``triplet`` is well formed.

    Checks, in order: sentence long enough for two disjoint spans, sentiment
    not the NONE sentinel, span bounds within [0, sentence_length), start <=
    end for both spans, and the two spans disjoint.
    """
    if sentence_length < 2:
        raise TripletValidationError(
            f"sentence length {sentence_length} cannot hold two disjoint spans"
        )
    if triplet.sentiment is SentimentLabel.NONE:
        raise TripletValidationError(
            "NONE sentiment is a decoder sentinel and is invalid in data"
        )
    for name, start, end in (
        ("aspect", triplet.aspect_start, triplet.aspect_end),
        ("opinion", triplet.opinion_start, triplet.opinion_end),
    ):
        if not (0 <= start < sentence_length and 0 <= end < sentence_length):
            raise TripletValidationError(
                f"{name} span ({start}, {end}) out of range for "
                f"sentence of length {sentence_length}"
            )
        if start > end:
            raise TripletValidationError(f"inverted {name} span ({start}, {end})")
    if not spans_disjoint(triplet.aspect_span, triplet.opinion_span):
        raise TripletValidationError(
            f"aspect span {triplet.aspect_span} overlaps "
            f"opinion span {triplet.opinion_span}"
        )


def is_valid_triplet(triplet: OpinionTriplet, sentence_length: int) -> bool:
    try:
        validate_triplet(triplet, sentence_length)
    except TripletValidationError:
        return False
    return True


def sort_targets(
    triplets: list[OpinionTriplet], direction: GenerationDirection
) -> list[OpinionTriplet]:
    """Order triplets the way the decoder is trained to emit them.

    Aspect-first sorts by ascending aspect start, opinion-first by ascending
    opinion start. Ties fall back to the other span's start, then to the end
    positions, finally to the sentiment index, giving a total order even for
    degenerate inputs that repeat a span pair.
    """
    if direction is GenerationDirection.ASPECT_FIRST:
        def key(t: OpinionTriplet):
            return (
                t.aspect_start,
                t.opinion_start,
                t.aspect_end,
                t.opinion_end,
                SENTIMENT_TO_INDEX[t.sentiment],
            )
    else:
        def key(t: OpinionTriplet):
            return (
                t.opinion_start,
                t.aspect_start,
                t.opinion_end,
                t.aspect_end,
                SENTIMENT_TO_INDEX[t.sentiment],
            )
    return sorted(triplets, key=key)


def classify_sentence(triplets: list[OpinionTriplet] | tuple) -> SentenceFlags:
    """Derive the Single/Multi/MultiPol/Overlap flags from a gold triplet set.

    Overlap means two triplets share an identical aspect span or an identical
    opinion span (not mere partial intersection).
    """
    if not triplets:
        raise ValueError("cannot classify a sentence with no gold triplets")
    multi = len(triplets) >= 2
    multipol = len({t.sentiment for t in triplets}) >= 2
    aspect_spans = [t.aspect_span for t in triplets]
    opinion_spans = [t.opinion_span for t in triplets]
    overlap = len(set(aspect_spans)) < len(aspect_spans) or len(
        set(opinion_spans)
    ) < len(opinion_spans)
    return SentenceFlags(
        is_single=not multi,
        is_multi=multi,
        is_multipol=multipol,
        is_overlap=overlap,
    )

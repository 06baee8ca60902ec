import pytest
from hypothesis import given
from hypothesis import strategies as st

from paste_aste.triplets import (
    GenerationDirection,
    OpinionTriplet,
    SentimentLabel,
    TripletValidationError,
    classify_sentence,
    sort_targets,
    validate_triplet,
)

AF = GenerationDirection.ASPECT_FIRST
OF = GenerationDirection.OPINION_FIRST


def t(a_start, a_end, o_start, o_end, senti="POS"):
    return OpinionTriplet(a_start, a_end, o_start, o_end, SentimentLabel(senti))


@st.composite
def triplets(draw, n=12):
    """A valid triplet for a sentence of length n: two disjoint spans."""
    a_start = draw(st.integers(0, n - 2))
    a_end = draw(st.integers(a_start, n - 2))
    before = a_start >= 1 and draw(st.booleans())
    if before:
        o_start = draw(st.integers(0, a_start - 1))
        o_end = draw(st.integers(o_start, a_start - 1))
    else:
        o_start = draw(st.integers(a_end + 1, n - 1))
        o_end = draw(st.integers(o_start, n - 1))
    senti = draw(st.sampled_from(["POS", "NEG", "NEU"]))
    return t(a_start, a_end, o_start, o_end, senti)


class TestValidate:
    def test_worked_example_triplet(self):
        validate_triplet(t(0, 0, 2, 2), 13)

    def test_overlapping_spans_rejected(self):
        with pytest.raises(TripletValidationError, match="overlap"):
            validate_triplet(t(0, 1, 1, 2), 5)

    def test_inverted_aspect_span_rejected(self):
        with pytest.raises(TripletValidationError, match="inverted aspect"):
            validate_triplet(t(3, 2, 0, 1, "NEG"), 5)

    def test_out_of_range_rejected(self):
        with pytest.raises(TripletValidationError, match="out of range"):
            validate_triplet(t(0, 0, 4, 5), 5)
        with pytest.raises(TripletValidationError, match="out of range"):
            validate_triplet(t(-1, 0, 2, 2), 5)

    def test_none_sentiment_rejected(self):
        with pytest.raises(TripletValidationError, match="NONE"):
            validate_triplet(t(0, 0, 2, 2, "NONE"), 5)

    def test_too_short_sentence_rejected(self):
        with pytest.raises(TripletValidationError):
            validate_triplet(t(0, 0, 1, 1), 1)

    @given(st.lists(triplets(), min_size=1, max_size=5))
    def test_generated_triplets_are_valid(self, ts):
        for triplet in ts:
            validate_triplet(triplet, 12)


class TestSortTargets:
    def test_aspect_first_orders_by_aspect_start(self):
        given_order = [t(6, 7, 11, 11, "NEG"), t(0, 0, 2, 2, "POS"), t(9, 9, 11, 11, "NEG")]
        expected = [t(0, 0, 2, 2, "POS"), t(6, 7, 11, 11, "NEG"), t(9, 9, 11, 11, "NEG")]
        assert sort_targets(given_order, AF) == expected

    def test_opinion_first_orders_by_opinion_start(self):
        given_order = [t(0, 0, 5, 5, "POS"), t(2, 2, 3, 3, "NEG")]
        assert sort_targets(given_order, OF) == [t(2, 2, 3, 3, "NEG"), t(0, 0, 5, 5, "POS")]

    def test_empty(self):
        assert sort_targets([], AF) == []

    def test_tie_break_uses_other_span_then_ends(self):
        shared_aspect = [t(1, 1, 6, 9, "NEG"), t(1, 1, 3, 3, "POS")]
        assert sort_targets(shared_aspect, AF) == [t(1, 1, 3, 3, "POS"), t(1, 1, 6, 9, "NEG")]

    @given(st.lists(triplets(), max_size=6), st.sampled_from([AF, OF]))
    def test_is_permutation(self, ts, direction):
        assert sorted(sort_targets(ts, direction)) == sorted(ts)

    @given(st.lists(triplets(), max_size=6), st.sampled_from([AF, OF]))
    def test_idempotent(self, ts, direction):
        once = sort_targets(ts, direction)
        assert sort_targets(once, direction) == once

    @given(st.lists(triplets(), max_size=6), st.randoms(), st.sampled_from([AF, OF]))
    def test_input_order_irrelevant(self, ts, rng, direction):
        shuffled = list(ts)
        rng.shuffle(shuffled)
        assert sort_targets(shuffled, direction) == sort_targets(ts, direction)


class TestClassifySentence:
    def test_shared_aspect_sentence(self):
        # "film ; good ; POS" and "film ; could have been better ; NEG"
        flags = classify_sentence([t(1, 1, 3, 3, "POS"), t(1, 1, 6, 9, "NEG")])
        assert flags.is_multi and flags.is_multipol and flags.is_overlap
        assert not flags.is_single

    def test_single(self):
        flags = classify_sentence([t(0, 0, 2, 2)])
        assert flags.is_single
        assert not (flags.is_multi or flags.is_multipol or flags.is_overlap)

    def test_shared_opinion_span_is_overlap_not_multipol(self):
        flags = classify_sentence([t(6, 7, 11, 11, "NEG"), t(9, 9, 11, 11, "NEG")])
        assert flags.is_multi and flags.is_overlap
        assert not flags.is_multipol

    def test_distinct_spans_not_overlap(self):
        flags = classify_sentence([t(1, 1, 3, 3, "NEG"), t(7, 7, 9, 9, "POS")])
        assert flags.is_multi and flags.is_multipol
        assert not flags.is_overlap

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            classify_sentence([])

    @given(st.lists(triplets(), min_size=1, max_size=6))
    def test_flag_invariants(self, ts):
        flags = classify_sentence(ts)
        assert flags.is_single != flags.is_multi
        if flags.is_multipol:
            assert flags.is_multi
        if flags.is_overlap:
            assert flags.is_multi

    def test_flag_invariants_hold_on_toy_corpus(self, toy_train, toy_dev):
        for sentence in list(toy_train) + list(toy_dev):
            flags = sentence.flags
            assert flags.is_single != flags.is_multi
            assert flags.is_multi or not (flags.is_multipol or flags.is_overlap)

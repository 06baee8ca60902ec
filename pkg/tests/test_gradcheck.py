"""Fast gradient-check slices; the full every-tensor sweep runs in the
acceptance suite."""

import pytest
import torch

from paste_aste.corpus import AnnotatedSentence, build_vocab
from paste_aste.model import ModelConfig, TripletExtractionModel, make_batch
from paste_aste.training import (
    build_target_sequence,
    compute_loss,
    gradient_check,
    seed_everything,
)
from paste_aste.triplets import OpinionTriplet, SentimentLabel


def tiny_sentences():
    first = AnnotatedSentence(
        tokens=("the", "soup", "was", "salty", "."),
        pos_tags=("DT", "NN", "VBD", "JJ", "."),
        dep_labels=("det", "nsubj", "cop", "root", "punct"),
        gold=(OpinionTriplet(1, 1, 3, 3, SentimentLabel.NEG),),
    )
    second = AnnotatedSentence(
        tokens=("fast", "chip", "but", "weak", "speakers", "."),
        pos_tags=("JJ", "NN", "CC", "JJ", "NNS", "."),
        dep_labels=("amod", "root", "cc", "amod", "conj", "punct"),
        gold=(
            OpinionTriplet(1, 1, 0, 0, SentimentLabel.POS),
            OpinionTriplet(4, 4, 3, 3, SentimentLabel.NEG),
        ),
    )
    return [first, second]


def tiny_setup(seed=99, direction="af"):
    sentences = tiny_sentences()
    vocab = build_vocab(sentences)
    config = ModelConfig(
        d_w=4, d_pos=4, d_dep=4, d_h=8, d_p=8, dropout=0.0,
        direction=direction, max_steps=3,
    )
    seed_everything(seed)
    model = TripletExtractionModel(config, vocab).double()
    batch = make_batch(sentences, vocab)
    targets = [build_target_sequence(s.gold, config.direction, 3) for s in sentences]
    return model, batch, targets


def test_attention_and_sentiment_tensors_match_finite_differences():
    model, batch, targets = tiny_setup()
    error = gradient_check(
        model, batch, targets, only=("attention", "sentiment_head")
    )
    assert error < 1e-4


def test_embedding_gradients_match_finite_differences():
    model, batch, targets = tiny_setup(seed=5)
    error = gradient_check(model, batch, targets, only=("pos_emb", "dep_emb"))
    assert error < 1e-4


def test_opinion_first_pointer_gradients_match_finite_differences():
    model, batch, targets = tiny_setup(seed=31, direction="of")
    error = gradient_check(
        model, batch, targets, only=("first_pointer", "second_pointer")
    )
    assert error < 1e-4


def test_zero_parameter_model_checks_cleanly():
    model, batch, targets = tiny_setup()
    with torch.no_grad():
        for param in model.parameters():
            param.zero_()
    error = gradient_check(model, batch, targets, only=("sentiment_head",))
    assert error < 1e-4


def test_single_weight_perturbation_moves_loss_with_gradient_sign():
    model, batch, targets = tiny_setup(seed=17)
    loss = compute_loss(model(batch, steps=3), targets)
    model.zero_grad()
    loss.backward()
    weight = model.sentiment_head.weight
    index = int(weight.grad.abs().argmax())
    gradient = float(weight.grad.view(-1)[index])
    base = float(loss.detach())
    with torch.no_grad():
        weight.view(-1)[index] += 1e-5
        bumped = float(compute_loss(model(batch, steps=3), targets))
        weight.view(-1)[index] -= 1e-5
    assert (bumped - base) * gradient > 0


def test_float32_model_rejected():
    sentences = tiny_sentences()
    vocab = build_vocab(sentences)
    config = ModelConfig(d_w=4, d_pos=4, d_dep=4, d_h=8, d_p=8, dropout=0.0, max_steps=3)
    model = TripletExtractionModel(config, vocab)  # float32
    batch = make_batch(sentences, vocab)
    targets = [build_target_sequence(s.gold, config.direction, 3) for s in sentences]
    with pytest.raises(ValueError, match="float64"):
        gradient_check(model, batch, targets)

"""Acceptance suite: one test per criterion, printing a PASS line each.

Criterion 1 needs the published dataset files (not redistributable here);
point PASTE_DATA_DIR at a directory containing 14lap/, 14rest/, 15rest/ and
16rest/ split files to activate it. Criterion 7 is the full-scale GPU-class
reproduction and is exercised by scripts/reproduce_full.py, not this suite.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest
import torch

from paste_aste.cli import find_split_file
from paste_aste.cli import main as cli_main
from paste_aste.corpus import import_dataset
from paste_aste.decoding import decode_triplets, predict_corpus, select_spans
from paste_aste.metrics import score_elements, score_exact_match
from paste_aste.model import ModelConfig, TripletExtractionModel, make_batch
from paste_aste.training import (
    TrainConfig,
    build_target_sequence,
    compute_loss,
    gradient_check,
    seed_everything,
    train,
)
from paste_aste.triplets import OpinionTriplet, SentimentLabel

from conftest import DATA_DIR
from test_decoding import oracle_select, random_distributions
from test_gradcheck import tiny_setup
from test_metrics import G1, G2, SPURIOUS
from test_metrics import t as triplet

# Published triplet-polarity counts per split: (POS, NEG, NEU).
POLARITY_TABLE = {
    "14lap": {"train": (817, 517, 126), "dev": (169, 141, 36), "test": (364, 116, 63)},
    "14rest": {"train": (1692, 480, 166), "dev": (404, 119, 54), "test": (773, 155, 66)},
    "15rest": {"train": (783, 205, 25), "dev": (185, 53, 11), "test": (317, 143, 25)},
    "16rest": {"train": (1015, 329, 50), "dev": (252, 76, 11), "test": (407, 78, 29)},
    "rest-all": {
        "train": (3490, 1014, 241),
        "dev": (841, 248, 76),
        "test": (1497, 376, 120),
    },
}

# Published sentence-category counts: (Single, Multi, MultiPol, Overlap, total).
CATEGORY_TABLE = {
    "14lap": {
        "train": (545, 361, 47, 257, 906),
        "dev": (133, 86, 10, 59, 219),
        "test": (184, 144, 18, 97, 328),
        "total": (862, 591, 75, 413, 1453),
    },
    "rest-all": {
        "train": (1447, 1281, 205, 731, 2728),
        "dev": (347, 321, 45, 197, 668),
        "test": (608, 532, 71, 317, 1140),
        "total": (2402, 2134, 321, 1245, 4536),
    },
}


def locate_published_data():
    candidates = []
    env = os.environ.get("PASTE_DATA_DIR")
    if env:
        candidates.append(Path(env))
    repo_root = Path(__file__).resolve().parent.parent
    candidates += [repo_root / "data", Path("data")]
    for candidate in candidates:
        if candidate.is_dir() and find_split_file(candidate, "14lap", "train"):
            return candidate
    return None


def test_criterion_1_dataset_fidelity(tmp_path):
    data_dir = locate_published_data()
    if data_dir is None:
        pytest.skip(
            "criterion 1 SKIPPED: published dataset files not present; set "
            "PASTE_DATA_DIR to a directory holding 14lap/, 14rest/, 15rest/, "
            "16rest/ split files to run the Table 2/3 reproduction"
        )
    started = time.monotonic()
    reports = {}
    for dataset in ("14lap", "14rest", "15rest", "16rest", "rest-all"):
        code = cli_main(
            ["stats", "--data-dir", str(data_dir), "--dataset", dataset,
             "--out-dir", str(tmp_path), "--quiet"]
        )
        assert code == 0, f"cmd_stats failed for {dataset}"
        with open(tmp_path / f"stats_{dataset}.json", encoding="utf-8") as handle:
            reports[dataset] = json.load(handle)

    for dataset, expected_rows in POLARITY_TABLE.items():
        for split, (pos, neg, neu) in expected_rows.items():
            stats = reports[dataset]["splits"][split]
            assert (stats["pos"], stats["neg"], stats["neu"]) == (
                pos, neg, neu,
            ), f"{dataset}/{split} polarity counts"

    for dataset, expected_rows in CATEGORY_TABLE.items():
        report = reports[dataset]
        for split, expected in expected_rows.items():
            stats = report["total"] if split == "total" else report["splits"][split]
            got = (
                stats["single"], stats["multi"], stats["multipol"],
                stats["overlap"], stats["sentences"],
            )
            assert got == expected, f"{dataset}/{split} category counts"

    laptop = reports["14lap"]["total"]
    restaurant = reports["rest-all"]["total"]
    fraction = 100.0 * (laptop["overlap"] + restaurant["overlap"]) / (
        laptop["sentences"] + restaurant["sentences"]
    )
    assert abs(fraction - 27.68) <= 0.01, f"overlap fraction {fraction:.4f}%"
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"statistics took {elapsed:.1f}s"
    print(f"PASS criterion 1: Tables 2-3 reproduced, overlap {fraction:.2f}% ({elapsed:.1f}s)")


def test_criterion_2_span_selection_matches_oracle():
    started = time.monotonic()
    rng = np.random.default_rng(20210914)
    for trial in range(1000):
        n = int(rng.integers(2, 21))
        a_start, a_end, o_start, o_end = random_distributions(rng, n)
        got = select_spans(a_start, a_end, o_start, o_end)
        aspect, opinion, score = oracle_select(a_start, a_end, o_start, o_end)
        assert got.aspect == aspect, f"trial {trial}: aspect span"
        assert got.opinion == opinion, f"trial {trial}: opinion span"
        assert abs(got.score - score) < 1e-9, f"trial {trial}: score"
    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"oracle sweep took {elapsed:.1f}s"
    print(f"PASS criterion 2: 1000 random instances match the exhaustive oracle ({elapsed:.1f}s)")


def test_criterion_3_gradient_correctness():
    started = time.monotonic()
    model, batch, targets = tiny_setup(seed=99)
    error = gradient_check(model, batch, targets, step=1e-5)
    elapsed = time.monotonic() - started
    assert error < 1e-4, f"max relative gradient error {error:.3e}"
    assert elapsed < 300.0, f"gradient check took {elapsed:.1f}s"
    print(f"PASS criterion 3: max relative gradient error {error:.2e} ({elapsed:.1f}s)")


def test_criterion_4_normalization_shapes_symmetry_fixpoint(toy_train, toy_vocab):
    started = time.monotonic()
    kwargs = dict(d_w=8, d_pos=4, d_dep=4, d_h=16, d_p=16, dropout=0.0, max_steps=4)
    batch = make_batch(toy_train[:3], toy_vocab)
    ones = torch.ones(batch.batch_size)

    for draw in range(100):
        seed_everything(1000 + draw)
        model = TripletExtractionModel(ModelConfig(direction="af", **kwargs), toy_vocab)
        model.eval()
        with torch.no_grad():
            outputs = model(batch, steps=2)
        for out in outputs:
            for probs in (
                out.aspect_start_probs,
                out.aspect_end_probs,
                out.opinion_start_probs,
                out.opinion_end_probs,
                out.sentiment_probs,
            ):
                torch.testing.assert_close(probs.sum(dim=1), ones, atol=1e-5, rtol=0)
            assert out.tuple_vec.shape == (batch.batch_size, 4 * 16)
            assert out.decoder_state.shape == (batch.batch_size, 16)

        if draw % 10 == 0:
            # accumulation exactness: replay the loop with an explicit sum
            with torch.no_grad():
                enc = model.encode(batch)
                hidden = torch.zeros(batch.batch_size, 16)
                cell = torch.zeros_like(hidden)
                tup_prev = torch.zeros(batch.batch_size, 64)
                for out in outputs:
                    context, _ = model.attention_step(enc, batch.mask, hidden, tup_prev)
                    hidden, cell = model.decoder_step(context, tup_prev, (hidden, cell))
                    first, second = model.pointer_pass(enc, batch.lengths, batch.mask, hidden)
                    tuple_vec = torch.cat([first.span_vec, second.span_vec], dim=-1)
                    assert torch.equal(tuple_vec, out.tuple_vec)
                    tup_prev = tup_prev + tuple_vec

    # direction symmetry under shared role weights
    seed_everything(77)
    af = TripletExtractionModel(ModelConfig(direction="af", **kwargs), toy_vocab)
    of = TripletExtractionModel(ModelConfig(direction="of", **kwargs), toy_vocab)
    of.load_state_dict(af.state_dict())
    af.eval()
    of.eval()
    with torch.no_grad():
        out_af = af(batch, steps=3)
        out_of = of(batch, steps=3)
    for a, o in zip(out_af, out_of):
        assert torch.equal(a.aspect_start_probs, o.opinion_start_probs)
        assert torch.equal(a.opinion_start_probs, o.aspect_start_probs)
        assert torch.equal(a.aspect_end_probs, o.opinion_end_probs)
        assert torch.equal(a.opinion_end_probs, o.aspect_end_probs)
        assert torch.equal(a.sentiment_probs, o.sentiment_probs)

    # zero-parameter fixpoint
    with torch.no_grad():
        for param in af.parameters():
            param.zero_()
        outputs = af(batch, steps=2)
    for out in outputs:
        torch.testing.assert_close(
            out.sentiment_probs, torch.full_like(out.sentiment_probs, 0.25)
        )
        for b, n in enumerate(batch.lengths.tolist()):
            torch.testing.assert_close(
                out.aspect_start_probs[b, :n], torch.full((n,), 1.0 / n)
            )
        assert float(out.decoder_state.abs().max()) == 0.0
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"normalization suite took {elapsed:.1f}s"
    print(f"PASS criterion 4: 100 draws normalized, symmetry and fixpoint hold ({elapsed:.1f}s)")


def test_criterion_5_overfitting_oracle(toy_train, toy_vocab, worked_example):
    started = time.monotonic()
    subset = list(toy_train)
    assert len(subset) == 20
    overlap_count = sum(s.flags.is_overlap for s in subset)
    assert overlap_count >= 3, "the training subset must contain Overlap sentences"

    config = ModelConfig(
        d_w=32, d_pos=8, d_dep=8, d_h=64, d_p=64, dropout=0.0,
        direction="af", max_steps=None,
    )
    train_config = TrainConfig(
        learning_rate=1e-3, weight_decay=1e-5, epochs=300, batch_size=10,
        seed=42, runs=1,
    )
    result = train(subset, subset, toy_vocab, config, train_config, quiet=True)
    assert result.best_dev_f1 == 1.0, (
        f"exact-match F1 reached only {result.best_dev_f1:.3f} "
        f"(best epoch {result.best_epoch})"
    )

    predicted = decode_triplets(result.model, toy_vocab, worked_example)
    assert set(predicted) == {
        OpinionTriplet(0, 0, 2, 2, SentimentLabel.POS),
        OpinionTriplet(6, 7, 11, 11, SentimentLabel.NEG),
        OpinionTriplet(9, 9, 11, 11, SentimentLabel.NEG),
    }
    predictions = predict_corpus(result.model, toy_vocab, subset)
    _, _, f1 = score_exact_match(predictions, [list(s.gold) for s in subset])
    assert f1 == 1.0
    elapsed = time.monotonic() - started
    assert elapsed < 600.0, f"overfit run took {elapsed:.1f}s"
    print(
        f"PASS criterion 5: memorized 20 sentences (F1=1.0 by epoch "
        f"{result.best_epoch}), worked example decoded exactly ({elapsed:.1f}s)"
    )


def test_criterion_6_scorer_correctness():
    precision, recall, f1 = score_exact_match([[G1, G2, SPURIOUS]], [[G1, G2]])
    assert abs(precision - 2 / 3) < 1e-12
    assert recall == 1.0
    assert abs(f1 - 0.8) < 1e-12

    assert score_exact_match([[G1], [G2]], [[G1], [G2]]) == (1.0, 1.0, 1.0)

    flipped = triplet(0, 0, 2, 2, "NEG")
    assert score_exact_match([[flipped]], [[G1]]) == (0.0, 0.0, 0.0)
    elements = score_elements([[flipped]], [[G1]])
    assert elements.aspect == (1.0, 1.0, 1.0)
    assert elements.opinion == (1.0, 1.0, 1.0)
    assert elements.sentiment_accuracy == 0.0
    print("PASS criterion 6: scorers reproduce the hand-countable cases")


def test_criterion_7_full_scale_reproduction():
    pytest.skip(
        "criterion 7 SKIPPED (resource-dependent, not a desk-scale gate): "
        "run scripts/reproduce_full.py with the published data and 300-dim "
        "vectors to compare 5-run median test F1 against 0.510 (14Lap) and "
        "0.704 (Restaurant) at +/-0.03"
    )


def test_criterion_8_masking_invariance(toy_vocab):
    sentences = import_dataset(DATA_DIR / "toy_train.jsonl", format="canonical")[:4]
    seed_everything(8)
    config = ModelConfig(d_w=8, d_pos=4, d_dep=4, d_h=16, d_p=16, dropout=0.0, max_steps=4)
    model = TripletExtractionModel(config, toy_vocab)
    model.eval()
    longest = max(len(s.gold) for s in sentences) + 2  # extra padding step
    targets = [build_target_sequence(s.gold, config.direction, longest) for s in sentences]
    batch = make_batch(sentences, toy_vocab)
    with torch.no_grad():
        outputs = model(batch, steps=longest)
    baseline = float(compute_loss(outputs, targets))

    rng = np.random.default_rng(0)
    with torch.no_grad():
        for b, seq in enumerate(targets):
            for j, step in enumerate(seq):
                if step.pointer_loss_mask:
                    continue
                n = batch.lengths[b]
                for probs in (
                    outputs[j].aspect_start_probs,
                    outputs[j].aspect_end_probs,
                    outputs[j].opinion_start_probs,
                    outputs[j].opinion_end_probs,
                ):
                    row = rng.random(int(n))
                    probs[b, :n] = torch.tensor(row / row.sum(), dtype=probs.dtype)
    perturbed = float(compute_loss(outputs, targets))
    assert perturbed == baseline, "masked steps leaked into the loss"
    print("PASS criterion 8: NONE-step pointer perturbations change the loss by exactly 0")

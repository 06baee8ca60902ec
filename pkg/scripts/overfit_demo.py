"""Desk-scale end-to-end demo: memorize the bundled toy corpus.

Trains a small aspect-first model on the 20-sentence fixture corpus until it
reproduces every gold triplet, then prints the decoded triplets for the
overlapping-span example sentence. Runs in a couple of minutes on one CPU.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from paste_aste.corpus import build_vocab, import_dataset
from paste_aste.decoding import decode_triplets, predict_corpus
from paste_aste.metrics import build_eval_report
from paste_aste.model import ModelConfig
from paste_aste.training import TrainConfig, train

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--epochs", type=int, default=150)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--direction", choices=("af", "of"), default="af")
    parser.add_argument("--out-dir", default="overfit-out")
    args = parser.parse_args()

    sentences = import_dataset(ROOT / "tests" / "data" / "toy_train.jsonl")
    vocab = build_vocab(sentences)
    model_config = ModelConfig(
        d_w=32, d_pos=8, d_dep=8, d_h=64, d_p=64, dropout=0.0,
        direction=args.direction, max_steps=None,
    )
    train_config = TrainConfig(
        epochs=args.epochs, batch_size=10, seed=args.seed, runs=1
    )
    result = train(
        sentences, sentences, vocab, model_config, train_config,
        out_dir=args.out_dir, run_name="overfit_demo",
    )

    report = build_eval_report(predict_corpus(result.model, vocab, sentences), sentences)
    print()
    print(report.to_text())
    print()
    example = sentences[0]
    print(f"decoded triplets for: {example.text()}")
    for triplet in decode_triplets(result.model, vocab, example):
        aspect = " ".join(example.tokens[triplet.aspect_start : triplet.aspect_end + 1])
        opinion = " ".join(example.tokens[triplet.opinion_start : triplet.opinion_end + 1])
        print(f"  ({aspect} ; {opinion} ; {triplet.sentiment.value})  {triplet.as_tuple()}")


if __name__ == "__main__":
    main()

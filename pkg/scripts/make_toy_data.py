"""Regenerate the frozen toy corpus under tests/data/.

The corpus is small enough to memorize quickly but covers every sentence
category (single, multi, multi-polarity, span-overlapping). Spans are given
as word phrases here and resolved to indices, so a typo fails loudly instead
of producing silently wrong fixtures.
"""

from __future__ import annotations

import json
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"

# (sentence, pos, dep, [(aspect phrase, opinion phrase, sentiment), ...])
TRAIN = [
    (
        "Ambience was good , but the main course and service were disappointing .",
        "NN VBD JJ , CC DT JJ NN CC NN VBD JJ .",
        "nsubj cop root punct cc det amod nsubj cc conj cop conj punct",
        [("Ambience", "good", "POS"), ("main course", "disappointing", "NEG"),
         ("service", "disappointing", "NEG")],
    ),
    (
        "The film was good , but could have been better .",
        "DT NN VBD JJ , CC MD VB VBN JJR .",
        "det nsubj cop root punct cc aux aux cop conj punct",
        [("film", "good", "POS"), ("film", "could have been better", "NEG")],
    ),
    (
        "The weather was gloomy , but the food was tasty .",
        "DT NN VBD JJ , CC DT NN VBD JJ .",
        "det nsubj cop root punct cc det nsubj cop conj punct",
        [("weather", "gloomy", "NEG"), ("food", "tasty", "POS")],
    ),
    (
        "Great battery life .",
        "JJ NN NN .",
        "amod compound root punct",
        [("battery life", "Great", "POS")],
    ),
    (
        "The screen is too dim .",
        "DT NN VBZ RB JJ .",
        "det nsubj cop advmod root punct",
        [("screen", "too dim", "NEG")],
    ),
    (
        "Service was slow and the waiters were rude .",
        "NN VBD JJ CC DT NNS VBD JJ .",
        "nsubj cop root cc det nsubj cop conj punct",
        [("Service", "slow", "NEG"), ("waiters", "rude", "NEG")],
    ),
    (
        "The pizza was delicious but overpriced .",
        "DT NN VBD JJ CC JJ .",
        "det nsubj cop root cc conj punct",
        [("pizza", "delicious", "POS"), ("pizza", "overpriced", "NEG")],
    ),
    (
        "Keyboard feels cheap .",
        "NN VBZ JJ .",
        "nsubj root xcomp punct",
        [("Keyboard", "cheap", "NEG")],
    ),
    (
        "The staff were friendly and the drinks were cheap .",
        "DT NN VBD JJ CC DT NNS VBD JJ .",
        "det nsubj cop root cc det nsubj cop conj punct",
        [("staff", "friendly", "POS"), ("drinks", "cheap", "POS")],
    ),
    (
        "Amazing sushi and amazing service .",
        "JJ NN CC JJ NN .",
        "amod root cc amod conj punct",
        [("sushi", "Amazing", "POS"), ("service", "amazing", "POS")],
    ),
    (
        "Battery life is decent .",
        "NN NN VBZ JJ .",
        "compound nsubj cop root punct",
        [("Battery life", "decent", "NEU")],
    ),
    (
        "The touchpad and the keyboard are unresponsive .",
        "DT NN CC DT NN VBP JJ .",
        "det nsubj cc det conj cop root punct",
        [("touchpad", "unresponsive", "NEG"), ("keyboard", "unresponsive", "NEG")],
    ),
    (
        "Portions are small but flavors are bold .",
        "NNS VBP JJ CC NNS VBP JJ .",
        "nsubj cop root cc nsubj cop conj punct",
        [("Portions", "small", "NEG"), ("flavors", "bold", "POS")],
    ),
    (
        "I love the spicy tuna rolls .",
        "PRP VBP DT JJ NN NNS .",
        "nsubj root det amod compound obj punct",
        [("spicy tuna rolls", "love", "POS")],
    ),
    (
        "The wine list is extensive .",
        "DT NN NN VBZ JJ .",
        "det compound nsubj cop root punct",
        [("wine list", "extensive", "POS")],
    ),
    (
        "Setup was quick and painless .",
        "NN VBD JJ CC JJ .",
        "nsubj cop root cc conj punct",
        [("Setup", "quick", "POS"), ("Setup", "painless", "POS")],
    ),
    (
        "The desserts were average .",
        "DT NNS VBD JJ .",
        "det nsubj cop root punct",
        [("desserts", "average", "NEU")],
    ),
    (
        "Fast boot times but a noisy fan .",
        "JJ NN NNS CC DT JJ NN .",
        "amod compound root cc det amod conj punct",
        [("boot times", "Fast", "POS"), ("fan", "noisy", "NEG")],
    ),
    (
        "The salmon was cooked perfectly .",
        "DT NN VBD VBN RB .",
        "det nsubj aux root advmod punct",
        [("salmon", "cooked perfectly", "POS")],
    ),
    (
        "Horrible customer support .",
        "JJ NN NN .",
        "amod compound root punct",
        [("customer support", "Horrible", "NEG")],
    ),
]

DEV = [
    (
        "The fries were soggy .",
        "DT NNS VBD JJ .",
        "det nsubj cop root punct",
        [("fries", "soggy", "NEG")],
    ),
    (
        "Excellent build quality .",
        "JJ NN NN .",
        "amod compound root punct",
        [("build quality", "Excellent", "POS")],
    ),
    (
        "The music was loud and the tables were cramped .",
        "DT NN VBD JJ CC DT NNS VBD JJ .",
        "det nsubj cop root cc det nsubj cop conj punct",
        [("music", "loud", "NEG"), ("tables", "cramped", "NEG")],
    ),
    (
        "Decent price for a solid laptop .",
        "JJ NN IN DT JJ NN .",
        "amod root case det amod nmod punct",
        [("price", "Decent", "NEU"), ("laptop", "solid", "POS")],
    ),
]


def find_span(tokens: list[str], phrase: str) -> tuple[int, int]:
    words = phrase.split()
    for start in range(len(tokens) - len(words) + 1):
        if tokens[start : start + len(words)] == words:
            return start, start + len(words) - 1
    raise ValueError(f"phrase {phrase!r} not found in {' '.join(tokens)!r}")


def to_record(entry) -> dict:
    sentence, pos, dep, phrase_triplets = entry
    tokens = sentence.split()
    pos_tags = pos.split()
    dep_labels = dep.split()
    if not (len(tokens) == len(pos_tags) == len(dep_labels)):
        raise ValueError(f"tag count mismatch for {sentence!r}")
    triplets = []
    for aspect, opinion, sentiment in phrase_triplets:
        a_start, a_end = find_span(tokens, aspect)
        o_start, o_end = find_span(tokens, opinion)
        triplets.append([a_start, a_end, o_start, o_end, sentiment])
    return {"tokens": tokens, "pos": pos_tags, "dep": dep_labels, "triplets": triplets}


def write_jsonl(path: Path, entries) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(json.dumps(to_record(entry)) + "\n")
    print(f"wrote {path}")


def write_published(path: Path, entries) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            record = to_record(entry)
            triplets = [
                (
                    list(range(a_start, a_end + 1)),
                    list(range(o_start, o_end + 1)),
                    sentiment,
                )
                for a_start, a_end, o_start, o_end, sentiment in record["triplets"]
            ]
            handle.write(f"{' '.join(record['tokens'])}####{triplets}\n")
    print(f"wrote {path}")


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    write_jsonl(DATA_DIR / "toy_train.jsonl", TRAIN)
    write_jsonl(DATA_DIR / "toy_dev.jsonl", DEV)
    write_published(DATA_DIR / "sample_published.txt", TRAIN[:3])


if __name__ == "__main__":
    main()

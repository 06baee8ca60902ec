"""Convert published-format split files into annotated canonical JSONL.

The published distribution carries no POS/DEP tags, so training needs a
tagger. This script uses spaCy when installed (any English pipeline with a
tagger and parser); the tokens are passed through pre-tokenized and are never
re-split. Output: <out-dir>/<dataset>/<split>.jsonl, directly usable via
--data-dir.

Example:
    python scripts/prepare_annotations.py --data-dir /data/aste-v2 \
        --dataset 14lap --out-dir data-annotated
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from paste_aste.cli import DATASETS, SPLITS, find_split_file
from paste_aste.corpus import annotate, export_canonical, import_dataset


class SpacyAnnotator:
    """POS tag and incoming dependency label per pre-tokenized word."""

    def __init__(self, model: str = "en_core_web_sm"):
        try:
            import spacy
            from spacy.tokens import Doc
        except ImportError:
            sys.exit(
                "spaCy is not installed; install it (plus an English model) "
                "or provide pre-annotated canonical JSONL instead"
            )
        self._spacy = spacy.load(model)
        self._doc_cls = Doc

    def __call__(self, tokens: list[str]) -> tuple[list[str], list[str]]:
        doc = self._doc_cls(self._spacy.vocab, words=tokens)
        doc = self._spacy(doc)
        return [t.tag_ for t in doc], [t.dep_ for t in doc]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", required=True)
    parser.add_argument("--dataset", choices=DATASETS, required=True)
    parser.add_argument("--out-dir", default="data-annotated")
    parser.add_argument("--spacy-model", default="en_core_web_sm")
    args = parser.parse_args()

    if args.dataset == "rest-all":
        sys.exit("annotate the three restaurant datasets individually")

    annotator = SpacyAnnotator(args.spacy_model)
    out_base = Path(args.out_dir) / args.dataset
    out_base.mkdir(parents=True, exist_ok=True)
    for split in SPLITS:
        source = find_split_file(Path(args.data_dir), args.dataset, split)
        if source is None:
            print(f"{split}: no source file, skipped")
            continue
        fmt = "canonical" if source.suffix == ".jsonl" else "published"
        sentences = import_dataset(source, format=fmt)
        annotated = [
            s if s.is_annotated else annotate(s, annotator) for s in sentences
        ]
        target = out_base / f"{split}.jsonl"
        with open(target, "w", encoding="utf-8") as handle:
            export_canonical(annotated, handle)
        print(f"{split}: {len(annotated)} sentences -> {target}")


if __name__ == "__main__":
    main()

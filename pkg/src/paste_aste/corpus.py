"""Dataset ingestion, annotation plumbing, vocabularies, corpus statistics.

Two on-disk formats are understood:

* ``published`` — one record per line: the whitespace-tokenized sentence,
  a ``####`` separator, then a Python-literal list of
  ``([aspect indices], [opinion indices], 'POS'|'NEG'|'NEU')`` triplets.
* ``canonical`` — one JSON object per line:
  ``{"tokens": [...], "pos": [...]|null, "dep": [...]|null,
  "triplets": [[as, ae, os, oe, "POS"], ...]}``.

POS/DEP tags come from a pluggable annotator; the published format carries
none, so sentences imported from it stay unannotated until ``annotate`` runs.
"""

from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Protocol

import numpy as np

from .triplets import (
    OpinionTriplet,
    SentenceFlags,
    SentimentLabel,
    classify_sentence,
    validate_triplet,
)

UNK_TOKEN = "<unk>"
PAD_TOKEN = "<pad>"
UNK_ID = 0
PAD_ID = 1


class DataFormatError(ValueError):
    """Malformed dataset content; message carries the line number."""


class AnnotationError(ValueError):
    """An annotator broke its length-preserving contract."""


@dataclass(frozen=True)
class AnnotatedSentence:
    """A tokenized review sentence with optional tags and gold triplets."""

    tokens: tuple[str, ...]
    pos_tags: tuple[str, ...] | None
    dep_labels: tuple[str, ...] | None
    gold: tuple[OpinionTriplet, ...]

    def __post_init__(self) -> None:
        n = len(self.tokens)
        if n < 1:
            raise DataFormatError("sentence has no tokens")
        for name, tags in (("pos", self.pos_tags), ("dep", self.dep_labels)):
            if tags is not None and len(tags) != n:
                raise DataFormatError(
                    f"{name} tags have length {len(tags)} for {n} tokens"
                )
        for triplet in self.gold:
            validate_triplet(triplet, n)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def is_annotated(self) -> bool:
        return self.pos_tags is not None and self.dep_labels is not None

    @property
    def flags(self) -> SentenceFlags:
        return classify_sentence(self.gold)

    def text(self) -> str:
        return " ".join(self.tokens)


class Annotator(Protocol):
    """Per-token tagger: takes the token list as-is, never re-tokenizes."""

    def __call__(self, tokens: list[str]) -> tuple[list[str], list[str]]:
        """Return (pos_tags, dep_labels), one of each per input token."""
        ...


class MappingAnnotator:
    """Annotator backed by a frozen {sentence text: (pos, dep)} table.

    Used to replay pre-computed annotations (test fixtures, cached tagger
    output) so nothing at runtime depends on a third-party tagger.
    """

    def __init__(self, table: dict[str, tuple[list[str], list[str]]]):
        self.table = table

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "MappingAnnotator":
        table = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                table[" ".join(record["tokens"])] = (record["pos"], record["dep"])
        return cls(table)

    def __call__(self, tokens: list[str]) -> tuple[list[str], list[str]]:
        key = " ".join(tokens)
        if key not in self.table:
            raise AnnotationError(f"no frozen annotation for sentence: {key!r}")
        pos, dep = self.table[key]
        return list(pos), list(dep)


def annotate(sentence: AnnotatedSentence, annotator: Annotator) -> AnnotatedSentence:
    """Fill pos_tags/dep_labels via ``annotator``, preserving tokenization."""
    pos, dep = annotator(list(sentence.tokens))
    n = len(sentence)
    if len(pos) != n or len(dep) != n:
        raise AnnotationError(
            f"annotator returned {len(pos)} POS / {len(dep)} DEP tags "
            f"for {n} tokens"
        )
    return AnnotatedSentence(
        tokens=sentence.tokens,
        pos_tags=tuple(pos),
        dep_labels=tuple(dep),
        gold=sentence.gold,
    )


def _span_from_indices(indices: list[int], what: str, line_no: int) -> tuple[int, int]:
    if not indices:
        raise DataFormatError(f"line {line_no}: empty {what} index list")
    indices = [int(i) for i in indices]
    if indices != list(range(indices[0], indices[-1] + 1)):
        raise DataFormatError(
            f"line {line_no}: non-contiguous {what} index list {indices}"
        )
    return indices[0], indices[-1]


def _parse_published_line(line: str, line_no: int) -> AnnotatedSentence:
    parts = line.split("####")
    if len(parts) != 2:
        raise DataFormatError(
            f"line {line_no}: expected 'sentence####[triplets]', "
            f"got {len(parts)} '####'-separated fields"
        )
    text, raw_triplets = parts
    tokens = tuple(text.split())
    if not tokens:
        raise DataFormatError(f"line {line_no}: empty sentence text")
    try:
        records = ast.literal_eval(raw_triplets.strip())
    except (ValueError, SyntaxError) as exc:
        raise DataFormatError(f"line {line_no}: unparseable triplet list: {exc}")
    if not isinstance(records, list) or not records:
        raise DataFormatError(f"line {line_no}: sentence has no triplets")
    gold = []
    for record in records:
        if len(record) != 3:
            raise DataFormatError(
                f"line {line_no}: triplet record {record!r} is not a 3-tuple"
            )
        aspect_ids, opinion_ids, sentiment = record
        a_start, a_end = _span_from_indices(list(aspect_ids), "aspect", line_no)
        o_start, o_end = _span_from_indices(list(opinion_ids), "opinion", line_no)
        try:
            label = SentimentLabel(sentiment)
        except ValueError:
            raise DataFormatError(
                f"line {line_no}: unknown sentiment {sentiment!r}"
            ) from None
        gold.append(OpinionTriplet(a_start, a_end, o_start, o_end, label))
    try:
        return AnnotatedSentence(
            tokens=tokens, pos_tags=None, dep_labels=None, gold=tuple(gold)
        )
    except ValueError as exc:
        raise DataFormatError(f"line {line_no}: {exc}") from None


def _parse_canonical_line(line: str, line_no: int) -> AnnotatedSentence:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"line {line_no}: invalid JSON: {exc}")
    try:
        tokens = tuple(record["tokens"])
        triplets = tuple(
            OpinionTriplet.from_tuple(tuple(values)) for values in record["triplets"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"line {line_no}: bad record: {exc}")
    pos = record.get("pos")
    dep = record.get("dep")
    try:
        return AnnotatedSentence(
            tokens=tokens,
            pos_tags=tuple(pos) if pos is not None else None,
            dep_labels=tuple(dep) if dep is not None else None,
            gold=triplets,
        )
    except ValueError as exc:
        raise DataFormatError(f"line {line_no}: {exc}") from None


def import_dataset(
    source: IO[str] | str | Path, format: str = "canonical"
) -> list[AnnotatedSentence]:
    """Parse a dataset stream or file into validated sentences.

    ``format`` is ``published`` or ``canonical``. Every line must yield a
    sentence with at least one valid triplet; errors name the line.
    """
    if format not in ("published", "canonical"):
        raise ValueError(f"unknown dataset format {format!r}")
    parse = _parse_published_line if format == "published" else _parse_canonical_line
    close = False
    if isinstance(source, (str, Path)):
        source = open(source, encoding="utf-8")
        close = True
    try:
        sentences = []
        for line_no, line in enumerate(source, start=1):
            if not line.strip():
                continue
            sentences.append(parse(line.rstrip("\n"), line_no))
        return sentences
    finally:
        if close:
            source.close()


def export_canonical(
    sentences: Iterable[AnnotatedSentence],
    stream: IO[str],
    predictions: list[list[OpinionTriplet]] | None = None,
) -> None:
    """Write sentences as canonical JSONL; optionally add a "predicted" field."""
    sentences = list(sentences)
    if predictions is not None and len(predictions) != len(sentences):
        raise ValueError("predictions misaligned with sentences")
    for i, sentence in enumerate(sentences):
        record = {
            "tokens": list(sentence.tokens),
            "pos": list(sentence.pos_tags) if sentence.pos_tags else None,
            "dep": list(sentence.dep_labels) if sentence.dep_labels else None,
            "triplets": [list(t.as_tuple()) for t in sentence.gold],
        }
        if predictions is not None:
            record["predicted"] = [list(t.as_tuple()) for t in predictions[i]]
        stream.write(json.dumps(record) + "\n")


@dataclass
class Vocabulary:
    """Dense string-to-id maps for words, POS tags and DEP labels.

    Ids 0/1 are UNK/PAD in every map; lookup never fails (UNK fallback).
    ``word_vectors`` holds pre-trained rows for words found in an embedding
    table (zeros elsewhere); ``has_vector`` marks which rows are real so model
    init can randomize only the rest.
    """

    word_to_id: dict[str, int]
    pos_to_id: dict[str, int]
    dep_to_id: dict[str, int]
    word_vectors: np.ndarray | None = None
    has_vector: np.ndarray | None = None

    @property
    def num_words(self) -> int:
        return len(self.word_to_id)

    @property
    def num_pos(self) -> int:
        return len(self.pos_to_id)

    @property
    def num_dep(self) -> int:
        return len(self.dep_to_id)

    def word_id(self, token: str) -> int:
        return self.word_to_id.get(token, UNK_ID)

    def pos_id(self, tag: str) -> int:
        return self.pos_to_id.get(tag, UNK_ID)

    def dep_id(self, label: str) -> int:
        return self.dep_to_id.get(label, UNK_ID)

    def to_dict(self) -> dict:
        return {
            "word_to_id": self.word_to_id,
            "pos_to_id": self.pos_to_id,
            "dep_to_id": self.dep_to_id,
            "word_vectors": None
            if self.word_vectors is None
            else self.word_vectors.tolist(),
            "has_vector": None if self.has_vector is None else self.has_vector.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Vocabulary":
        return cls(
            word_to_id=dict(data["word_to_id"]),
            pos_to_id=dict(data["pos_to_id"]),
            dep_to_id=dict(data["dep_to_id"]),
            word_vectors=None
            if data.get("word_vectors") is None
            else np.asarray(data["word_vectors"], dtype=np.float32),
            has_vector=None
            if data.get("has_vector") is None
            else np.asarray(data["has_vector"], dtype=bool),
        )


def _reserved_map() -> dict[str, int]:
    return {UNK_TOKEN: UNK_ID, PAD_TOKEN: PAD_ID}


def build_vocab(
    train: list[AnnotatedSentence],
    embeddings: dict[str, np.ndarray] | None = None,
    embedding_dim: int | None = None,
) -> Vocabulary:
    """Build vocabularies from the training split only.

    When an embedding table is given, words found in it get its vector as
    initialization; the rest are left for random init in [-0.1, 0.1] at model
    construction. A lowercase-keyed table is probed with lowercased words,
    but the stored vocabulary keeps raw case.
    """
    if not train:
        raise ValueError("cannot build a vocabulary from an empty training set")
    word_to_id = _reserved_map()
    pos_to_id = _reserved_map()
    dep_to_id = _reserved_map()
    for sentence in train:
        for token in sentence.tokens:
            word_to_id.setdefault(token, len(word_to_id))
        for tag in sentence.pos_tags or ():
            pos_to_id.setdefault(tag, len(pos_to_id))
        for label in sentence.dep_labels or ():
            dep_to_id.setdefault(label, len(dep_to_id))

    word_vectors = None
    has_vector = None
    if embeddings is not None:
        dims = {v.shape[-1] for v in embeddings.values()}
        if len(dims) != 1:
            raise ValueError(f"embedding table mixes dimensions {sorted(dims)}")
        (dim,) = dims
        if embedding_dim is not None and dim != embedding_dim:
            raise ValueError(
                f"embedding table dimension {dim} != configured d_w {embedding_dim}"
            )
        lowercase_keyed = all(key == key.lower() for key in embeddings)
        word_vectors = np.zeros((len(word_to_id), dim), dtype=np.float32)
        has_vector = np.zeros(len(word_to_id), dtype=bool)
        for token, idx in word_to_id.items():
            key = token.lower() if lowercase_keyed else token
            if key in embeddings:
                word_vectors[idx] = embeddings[key]
                has_vector[idx] = True
    return Vocabulary(word_to_id, pos_to_id, dep_to_id, word_vectors, has_vector)


def load_word_vectors(path: str | Path) -> dict[str, np.ndarray]:
    """Read a GloVe-style text file: one token followed by its floats per line."""
    table: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            parts = line.rstrip().split(" ")
            if len(parts) < 2:
                continue
            table[parts[0]] = np.asarray([float(x) for x in parts[1:]], dtype=np.float32)
    return table


@dataclass
class SplitStats:
    """Exact counts for one train/dev/test split."""

    sentences: int = 0
    pos_triplets: int = 0
    neg_triplets: int = 0
    neu_triplets: int = 0
    single: int = 0
    multi: int = 0
    multipol: int = 0
    overlap: int = 0

    def add(self, other: "SplitStats") -> "SplitStats":
        return SplitStats(
            *(
                getattr(self, f) + getattr(other, f)
                for f in (
                    "sentences",
                    "pos_triplets",
                    "neg_triplets",
                    "neu_triplets",
                    "single",
                    "multi",
                    "multipol",
                    "overlap",
                )
            )
        )


@dataclass
class StatisticsReport:
    """Per-split counts plus totals for one dataset."""

    dataset: str
    splits: dict[str, SplitStats] = field(default_factory=dict)

    @property
    def total(self) -> SplitStats:
        total = SplitStats()
        for stats in self.splits.values():
            total = total.add(stats)
        return total

    @property
    def overlap_fraction(self) -> float:
        total = self.total
        return total.overlap / total.sentences if total.sentences else 0.0

    def to_json(self) -> dict:
        def row(stats: SplitStats) -> dict:
            return {
                "sentences": stats.sentences,
                "pos": stats.pos_triplets,
                "neg": stats.neg_triplets,
                "neu": stats.neu_triplets,
                "single": stats.single,
                "multi": stats.multi,
                "multipol": stats.multipol,
                "overlap": stats.overlap,
            }

        return {
            "dataset": self.dataset,
            "splits": {name: row(stats) for name, stats in self.splits.items()},
            "total": row(self.total),
            "overlap_fraction": self.overlap_fraction,
        }

    def to_text(self) -> str:
        lines = [f"Dataset: {self.dataset}", "", "Triplet polarities"]
        header = f"{'Split':<8}{'# Pos.':>8}{'# Neg.':>8}{'# Neu.':>8}"
        lines.append(header)
        for name, stats in self.splits.items():
            lines.append(
                f"{name:<8}{stats.pos_triplets:>8}{stats.neg_triplets:>8}"
                f"{stats.neu_triplets:>8}"
            )
        lines += ["", "Sentence categories"]
        lines.append(
            f"{'Split':<8}{'Single':>8}{'Multi':>8}{'MultiPol':>10}"
            f"{'Overlap':>9}{'# Sent.':>9}"
        )
        for name, stats in list(self.splits.items()) + [("Total", self.total)]:
            lines.append(
                f"{name:<8}{stats.single:>8}{stats.multi:>8}{stats.multipol:>10}"
                f"{stats.overlap:>9}{stats.sentences:>9}"
            )
        lines.append("")
        lines.append(f"Overlap fraction: {self.overlap_fraction:.2%}")
        return "\n".join(lines)


def compute_statistics(
    dataset: str, splits: dict[str, list[AnnotatedSentence]]
) -> StatisticsReport:
    """Count triplet polarities and sentence categories per split."""
    report = StatisticsReport(dataset=dataset)
    for name, sentences in splits.items():
        stats = SplitStats()
        for sentence in sentences:
            stats.sentences += 1
            for triplet in sentence.gold:
                if triplet.sentiment is SentimentLabel.POS:
                    stats.pos_triplets += 1
                elif triplet.sentiment is SentimentLabel.NEG:
                    stats.neg_triplets += 1
                else:
                    stats.neu_triplets += 1
            flags = sentence.flags
            stats.single += flags.is_single
            stats.multi += flags.is_multi
            stats.multipol += flags.is_multipol
            stats.overlap += flags.is_overlap
        report.splits[name] = stats
    return report

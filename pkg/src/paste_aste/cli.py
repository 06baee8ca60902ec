"""Command-line surface: stats, train, eval, predict, ablate.

Options resolve with CLI > config file > defaults precedence; the config
file is line-oriented ``key=value``. Every artifact embeds the fully
resolved configuration so a run can be reproduced from it alone.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from dataclasses import replace
from pathlib import Path

from .checkpoint import CheckpointError, check_config_consistency, load_checkpoint
from .corpus import (
    AnnotatedSentence,
    build_vocab,
    compute_statistics,
    export_canonical,
    import_dataset,
    load_word_vectors,
)
from .decoding import predict_corpus
from .metrics import build_eval_report
from .model import ModelConfig
from .training import TrainConfig, train
from .triplets import GenerationDirection

DATASETS = ("14lap", "14rest", "15rest", "16rest", "rest-all")
SPLITS = ("train", "dev", "test")
DEFAULT_SEEDS = (13, 42, 2021, 7, 99)

_REST_PARTS = ("14rest", "15rest", "16rest")

#: config-file keys and how to parse them
_CONFIG_TYPES = {
    "data_dir": str,
    "dataset": str,
    "direction": str,
    "epochs": int,
    "batch_size": int,
    "lr": float,
    "weight_decay": float,
    "dropout": float,
    "runs": int,
    "seed": str,
    "max_steps": int,
    "out_dir": str,
    "embeddings": str,
    "d_w": int,
    "d_pos": int,
    "d_dep": int,
    "d_h": int,
    "d_p": int,
}


class CliError(RuntimeError):
    pass


def parse_config_file(path: str | Path) -> dict:
    values: dict = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise CliError(f"{path}:{line_no}: expected key=value")
            key, _, value = stripped.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_TYPES:
                raise CliError(f"{path}:{line_no}: unknown option {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](value.strip())
            except ValueError as exc:
                raise CliError(f"{path}:{line_no}: {exc}")
    return values


def _resolve(args: argparse.Namespace, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if args.config_values and key in args.config_values:
        return args.config_values[key]
    return default


def _resolve_data_dir(args: argparse.Namespace) -> Path:
    data_dir = _resolve(args, "data_dir") or os.environ.get("PASTE_DATA_DIR")
    if not data_dir:
        raise CliError(
            "no data directory: pass --data-dir or set PASTE_DATA_DIR"
        )
    path = Path(data_dir)
    if not path.is_dir():
        raise CliError(f"data directory {path} does not exist")
    return path


def find_split_file(data_dir: Path, dataset: str, split: str) -> Path | None:
    """Locate a split file, trying canonical JSONL then published text names."""
    candidates = []
    for base in (data_dir / dataset, data_dir / "ASTE-Data-V2-EMNLP2020" / dataset):
        candidates += [
            base / f"{split}.jsonl",
            base / f"{split}_triplets.txt",
            base / f"{split}.txt",
        ]
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return None


def load_split(
    data_dir: Path, dataset: str, split: str, required: bool = True
) -> list[AnnotatedSentence] | None:
    if dataset == "rest-all":
        found = {name: find_split_file(data_dir, name, split) for name in _REST_PARTS}
        missing = [name for name, path in found.items() if path is None]
        if len(missing) == len(_REST_PARTS):
            if required:
                raise CliError(
                    f"no {split} files for rest-all under {data_dir} "
                    f"(needs {', '.join(_REST_PARTS)})"
                )
            return None
        if missing:
            raise CliError(
                f"incomplete rest-all {split} split under {data_dir}: "
                f"missing {', '.join(missing)}"
            )
        parts = []
        for name in _REST_PARTS:
            parts.extend(load_split(data_dir, name, split))
        return parts
    path = find_split_file(data_dir, dataset, split)
    if path is None:
        if required:
            raise CliError(
                f"no {split} file for dataset {dataset!r} under {data_dir} "
                f"(looked for {split}.jsonl, {split}_triplets.txt, {split}.txt)"
            )
        return None
    fmt = "canonical" if path.suffix == ".jsonl" else "published"
    return import_dataset(path, format=fmt)


def _parse_seeds(raw: str | int | None, runs: int) -> list[int]:
    if raw is None:
        seeds = list(DEFAULT_SEEDS)
    elif isinstance(raw, int):
        seeds = [raw]
    else:
        seeds = [int(part) for part in str(raw).split(",") if part.strip()]
    if len(seeds) < runs:
        if len(seeds) == 1:
            seeds = [seeds[0] + i for i in range(runs)]
        else:
            raise CliError(f"{len(seeds)} seeds given but --runs is {runs}")
    return seeds[:runs]


def _out_dir(args: argparse.Namespace, default: str) -> Path:
    out = Path(_resolve(args, "out_dir", default))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model_config(args: argparse.Namespace, direction: str) -> ModelConfig:
    return ModelConfig(
        d_w=_resolve(args, "d_w", 300),
        d_pos=_resolve(args, "d_pos", 50),
        d_dep=_resolve(args, "d_dep", 50),
        d_h=_resolve(args, "d_h", 300),
        d_p=_resolve(args, "d_p", 300),
        dropout=_resolve(args, "dropout", 0.5),
        direction=GenerationDirection.parse(direction),
        max_steps=_resolve(args, "max_steps"),
    )


def _train_config(args: argparse.Namespace, seed: int, runs: int) -> TrainConfig:
    return TrainConfig(
        learning_rate=_resolve(args, "lr", 1e-3),
        weight_decay=_resolve(args, "weight_decay", 1e-5),
        epochs=_resolve(args, "epochs", 100),
        batch_size=_resolve(args, "batch_size", 10),
        seed=seed,
        runs=runs,
        shuffle_targets=getattr(args, "shuffle_targets", False),
    )


def _require_annotations(
    sentences: list[AnnotatedSentence], config: ModelConfig, what: str
) -> None:
    if not (config.uses_pos or config.uses_dep):
        return
    missing = sum(not s.is_annotated for s in sentences)
    if missing:
        raise CliError(
            f"{missing} {what} sentences lack POS/DEP annotations; provide "
            f"canonical JSONL with pos/dep fields (see scripts/"
            f"prepare_annotations.py) or set d_pos=0 and d_dep=0"
        )


def _median(values: list[float]) -> float:
    return float(statistics.median(values))


def _run_training(
    args: argparse.Namespace,
    direction: str,
    seeds: list[int],
    out_dir: Path,
    tag: str,
    model_config: ModelConfig,
) -> dict:
    """Train one model variant across seeds; returns its manifest block."""
    data_dir = _resolve_data_dir(args)
    dataset = _resolve(args, "dataset") or "14lap"
    train_sentences = load_split(data_dir, dataset, "train")
    dev_sentences = load_split(data_dir, dataset, "dev")
    test_sentences = load_split(data_dir, dataset, "test", required=False)
    _require_annotations(train_sentences, model_config, "train")
    _require_annotations(dev_sentences, model_config, "dev")
    if test_sentences:
        _require_annotations(test_sentences, model_config, "test")

    embeddings_path = _resolve(args, "embeddings")
    embeddings = load_word_vectors(embeddings_path) if embeddings_path else None
    vocab = build_vocab(
        train_sentences, embeddings=embeddings, embedding_dim=model_config.d_w
    )

    per_run = []
    artifacts = []
    for index, seed in enumerate(seeds):
        train_config = _train_config(args, seed, len(seeds))
        run_name = f"{tag}_run{index}_seed{seed}"
        result = train(
            train_sentences,
            dev_sentences,
            vocab,
            model_config,
            train_config,
            out_dir=out_dir,
            run_name=run_name,
            quiet=args.quiet,
        )
        record = {
            "seed": seed,
            "best_dev_f1": result.best_dev_f1,
            "best_epoch": result.best_epoch,
            "checkpoint": str(result.checkpoint_path),
            "wall_clock_sec": result.wall_clock_sec,
        }
        if test_sentences:
            predictions = predict_corpus(result.model, vocab, test_sentences)
            report = build_eval_report(predictions, test_sentences)
            record["test_p"] = report.precision
            record["test_r"] = report.recall
            record["test_f1"] = report.f1
        per_run.append(record)
        artifacts.append(str(result.checkpoint_path))
        if not args.quiet:
            line = f"[{tag}] seed {seed}: dev F1 {result.best_dev_f1:.3f}"
            if "test_f1" in record:
                line += f", test F1 {record['test_f1']:.3f}"
            print(line)

    median = {"dev_f1": _median([r["best_dev_f1"] for r in per_run])}
    if test_sentences:
        for key in ("test_p", "test_r", "test_f1"):
            median[key] = _median([r[key] for r in per_run])
    return {
        "dataset": dataset,
        "direction": direction,
        "model_config": model_config.to_dict(),
        "seeds": seeds,
        "per_run": per_run,
        "median": median,
        "artifacts": artifacts,
    }


def _write_manifest(out_dir: Path, manifest: dict, quiet: bool) -> Path:
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
    if not quiet:
        print(f"manifest written to {path}")
    return path


def cmd_stats(args: argparse.Namespace) -> int:
    data_dir = _resolve_data_dir(args)
    dataset = _resolve(args, "dataset") or "14lap"
    splits = {}
    for split in SPLITS:
        sentences = load_split(data_dir, dataset, split, required=False)
        if sentences is not None:
            splits[split] = sentences
    if not splits:
        raise CliError(f"no split files found for {dataset} under {data_dir}")
    report = compute_statistics(dataset, splits)
    out_dir = _out_dir(args, "stats-out")
    json_path = out_dir / f"stats_{dataset}.json"
    text_path = out_dir / f"stats_{dataset}.txt"
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(report.to_json(), handle, indent=2)
    text = report.to_text()
    text_path.write_text(text + "\n", encoding="utf-8")
    if not args.quiet:
        print(text)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    started = time.monotonic()
    direction = _resolve(args, "direction", "af")
    runs = _resolve(args, "runs", 5)
    seeds = _parse_seeds(_resolve(args, "seed"), runs)
    out_dir = _out_dir(args, "train-out")
    model_config = _model_config(args, direction)
    block = _run_training(args, direction, seeds, out_dir, "model", model_config)
    manifest = {
        "command": "train",
        "config": _snapshot(args, direction=direction, runs=runs, seeds=seeds),
        **block,
        "wall_clock_sec": time.monotonic() - started,
    }
    _write_manifest(out_dir, manifest, args.quiet)
    median = manifest["median"]
    summary = f"median dev F1: {median['dev_f1']:.3f}"
    if "test_f1" in median:
        summary += f", median test F1: {median['test_f1']:.3f}"
    print(summary)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    if not args.checkpoint:
        raise CliError("--checkpoint is required for eval")
    model, vocab, config, _ = load_checkpoint(args.checkpoint)
    overrides = {
        "direction": _resolve(args, "direction"),
        "max_steps": _resolve(args, "max_steps"),
        "dropout": _resolve(args, "dropout"),
        "d_w": _resolve(args, "d_w"),
        "d_pos": _resolve(args, "d_pos"),
        "d_dep": _resolve(args, "d_dep"),
        "d_h": _resolve(args, "d_h"),
        "d_p": _resolve(args, "d_p"),
    }
    check_config_consistency(config, overrides)
    data_dir = _resolve_data_dir(args)
    dataset = _resolve(args, "dataset") or "14lap"
    sentences = load_split(data_dir, dataset, args.split)
    _require_annotations(sentences, config, args.split)
    predictions = predict_corpus(model, vocab, sentences)
    report = build_eval_report(predictions, sentences)
    out_dir = _out_dir(args, "eval-out")
    json_path = out_dir / f"eval_{dataset}_{args.split}.json"
    with open(json_path, "w", encoding="utf-8") as handle:
        json.dump(report.to_json(), handle, indent=2)
    (out_dir / f"eval_{dataset}_{args.split}.txt").write_text(
        report.to_text() + "\n", encoding="utf-8"
    )
    print(report.to_text())
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    if not args.checkpoint:
        raise CliError("--checkpoint is required for predict")
    model, vocab, config, _ = load_checkpoint(args.checkpoint)
    if args.input:
        fmt = "canonical" if args.input.endswith(".jsonl") else "published"
        sentences = import_dataset(args.input, format=fmt)
    else:
        data_dir = _resolve_data_dir(args)
        dataset = _resolve(args, "dataset") or "14lap"
        sentences = load_split(data_dir, dataset, args.split)
    _require_annotations(sentences, config, "input")
    predictions = predict_corpus(model, vocab, sentences)
    output = args.output or "predictions.jsonl"
    with open(output, "w", encoding="utf-8") as handle:
        export_canonical(sentences, handle, predictions=predictions)
    if not args.quiet:
        print(f"predictions written to {output}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    started = time.monotonic()
    direction = _resolve(args, "direction", "af")
    runs = _resolve(args, "runs", 5)
    seeds = _parse_seeds(_resolve(args, "seed"), runs)
    out_dir = _out_dir(args, "ablate-out")

    base_config = _model_config(args, direction)
    args.shuffle_targets = False
    baseline = _run_training(args, direction, seeds, out_dir, "baseline", base_config)

    if args.ablation == "no_posdep":
        ablated_config = replace(base_config, d_pos=0, d_dep=0)
    else:
        ablated_config = base_config
        args.shuffle_targets = True
    ablated = _run_training(
        args, direction, seeds, out_dir, f"ablated_{args.ablation}", ablated_config
    )
    args.shuffle_targets = False

    metric = "test_f1" if "test_f1" in baseline["median"] else "dev_f1"
    deltas = [
        base[metric] - abl[metric]
        for base, abl in zip(baseline["per_run"], ablated["per_run"])
        if metric in base and metric in abl
    ] or [baseline["median"][metric] - ablated["median"][metric]]
    base_f1 = baseline["median"][metric]
    drop = baseline["median"][metric] - ablated["median"][metric]
    manifest = {
        "command": "ablate",
        "ablation": args.ablation,
        "config": _snapshot(args, direction=direction, runs=runs, seeds=seeds),
        "baseline": baseline,
        "ablated": ablated,
        "f1_metric": metric,
        "per_run_f1_delta": deltas,
        "median_f1_delta": _median(deltas),
        "median_f1_drop_percent": (100.0 * drop / base_f1) if base_f1 else 0.0,
        "wall_clock_sec": time.monotonic() - started,
    }
    _write_manifest(out_dir, manifest, args.quiet)
    print(
        f"{args.ablation}: median {metric} {baseline['median'][metric]:.3f} -> "
        f"{ablated['median'][metric]:.3f} "
        f"({manifest['median_f1_drop_percent']:.1f}% F1 drop)"
    )
    return 0


def _snapshot(args: argparse.Namespace, **extra) -> dict:
    """Resolved configuration echoed into artifacts."""
    snapshot = {
        "data_dir": str(_resolve(args, "data_dir") or os.environ.get("PASTE_DATA_DIR", "")),
        "dataset": _resolve(args, "dataset") or "14lap",
        "epochs": _resolve(args, "epochs", 100),
        "batch_size": _resolve(args, "batch_size", 10),
        "lr": _resolve(args, "lr", 1e-3),
        "weight_decay": _resolve(args, "weight_decay", 1e-5),
        "dropout": _resolve(args, "dropout", 0.5),
        "max_steps": _resolve(args, "max_steps"),
        "d_w": _resolve(args, "d_w", 300),
        "d_pos": _resolve(args, "d_pos", 50),
        "d_dep": _resolve(args, "d_dep", 50),
        "d_h": _resolve(args, "d_h", 300),
        "d_p": _resolve(args, "d_p", 300),
        "embeddings": _resolve(args, "embeddings"),
    }
    snapshot.update(extra)
    return snapshot


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paste-aste",
        description="Pointer-network opinion triplet extraction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--data-dir", dest="data_dir")
        p.add_argument("--dataset", choices=DATASETS)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--quiet", action="store_true")

    def training_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--direction", choices=("af", "of"))
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch-size", dest="batch_size", type=int)
        p.add_argument("--lr", type=float)
        p.add_argument("--weight-decay", dest="weight_decay", type=float)
        p.add_argument("--dropout", type=float)
        p.add_argument("--runs", type=int)
        p.add_argument("--seed", help="seed or comma-separated seed list")
        p.add_argument("--max-steps", dest="max_steps", type=int)
        p.add_argument("--embeddings", help="GloVe-style word vector file")

    p_stats = sub.add_parser("stats", help="dataset statistics tables")
    common(p_stats)

    p_train = sub.add_parser("train", help="train across seeds, report medians")
    common(p_train)
    training_options(p_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    common(p_eval)
    training_options(p_eval)
    p_eval.add_argument("--checkpoint")
    p_eval.add_argument("--split", choices=SPLITS, default="test")

    p_predict = sub.add_parser("predict", help="write predictions as JSONL")
    common(p_predict)
    p_predict.add_argument("--checkpoint")
    p_predict.add_argument("--split", choices=SPLITS, default="test")
    p_predict.add_argument("--input", help="dataset file instead of --data-dir")
    p_predict.add_argument("--output")

    p_ablate = sub.add_parser("ablate", help="baseline vs ablated training")
    common(p_ablate)
    training_options(p_ablate)
    p_ablate.add_argument(
        "--ablation", choices=("random_order", "no_posdep"), required=True
    )
    return parser


_COMMANDS = {
    "stats": cmd_stats,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
    "ablate": cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.config_values = parse_config_file(args.config) if args.config else {}
    if not hasattr(args, "shuffle_targets"):
        args.shuffle_targets = False
    try:
        return _COMMANDS[args.command](args)
    except (CliError, CheckpointError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

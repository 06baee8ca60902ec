"""Target sequences, the joint negative log-likelihood, and the train loop.

The target for a sentence is its gold triplets in generation order followed
by one stop step (NONE sentiment) and NONE padding up to the batch-wide
sequence length J. Pointer positions only contribute to the loss at real
triplet steps; the stop step contributes its sentiment term; anything after
the first stop step contributes nothing.
"""

from __future__ import annotations

import copy
import json
import random
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import torch

from .checkpoint import save_checkpoint
from .corpus import AnnotatedSentence, Vocabulary
from .decoding import predict_corpus
from .metrics import score_exact_match
from .model import (
    DecoderStepOutput,
    ModelConfig,
    SentenceBatch,
    TripletExtractionModel,
    make_batch,
)
from .triplets import (
    SENTIMENT_TO_INDEX,
    GenerationDirection,
    OpinionTriplet,
    SentimentLabel,
    sort_targets,
)

#: Probabilities are clamped here before the logarithm.
PROB_FLOOR = 1e-12

#: Placeholder index stored at steps whose pointer targets are undefined.
NO_POSITION = -1


@dataclass(frozen=True)
class TargetStep:
    """Supervision for one decoding step.

    ``pointer_loss_mask`` is False exactly when the sentiment is the NONE
    sentinel; such steps carry no meaningful span positions.
    """

    aspect_start: int
    aspect_end: int
    opinion_start: int
    opinion_end: int
    sentiment: SentimentLabel
    pointer_loss_mask: bool

    def __post_init__(self) -> None:
        if (self.sentiment is SentimentLabel.NONE) == self.pointer_loss_mask:
            raise ValueError(
                "pointer_loss_mask must be False iff sentiment is NONE"
            )

    @classmethod
    def stop(cls) -> "TargetStep":
        return cls(
            NO_POSITION,
            NO_POSITION,
            NO_POSITION,
            NO_POSITION,
            SentimentLabel.NONE,
            False,
        )


@dataclass
class TrainConfig:
    """Optimization hyperparameters."""

    learning_rate: float = 1e-3
    weight_decay: float = 1e-5
    epochs: int = 100
    batch_size: int = 10
    seed: int = 13
    runs: int = 5
    shuffle_targets: bool = False  # ablation: random target order per epoch

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        for name in ("epochs", "batch_size", "runs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "runs": self.runs,
            "shuffle_targets": self.shuffle_targets,
        }


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def build_target_sequence(
    gold: Sequence[OpinionTriplet],
    direction: GenerationDirection,
    length: int,
    sort: bool = True,
) -> list[TargetStep]:
    """Gold triplets in generation order, a stop step, NONE padding to length.

    ``sort=False`` keeps the caller's triplet order (the random-order
    ablation shuffles before calling).
    """
    gold = list(gold)
    if not gold:
        raise ValueError("a training sentence must carry at least one triplet")
    if length < len(gold) + 1:
        raise ValueError(
            f"target length {length} cannot hold {len(gold)} triplets plus a stop step"
        )
    ordered = sort_targets(gold, direction) if sort else gold
    steps = [
        TargetStep(
            t.aspect_start,
            t.aspect_end,
            t.opinion_start,
            t.opinion_end,
            t.sentiment,
            True,
        )
        for t in ordered
    ]
    steps.extend(TargetStep.stop() for _ in range(length - len(steps)))
    return steps


def _as_batch_targets(
    targets: Sequence[Sequence[TargetStep]] | Sequence[TargetStep],
) -> list[list[TargetStep]]:
    targets = list(targets)
    if targets and isinstance(targets[0], TargetStep):
        return [targets]  # single sentence
    return [list(t) for t in targets]


def compute_loss(
    outputs: Sequence[DecoderStepOutput],
    targets: Sequence[Sequence[TargetStep]] | Sequence[TargetStep],
) -> torch.Tensor:
    """Average negative log-likelihood over batch size x sequence length.

    Per active step: log prob of the four gold pointer positions (real steps
    only) plus log prob of the gold sentiment. Steps after a sentence's first
    NONE target are excluded entirely; the normalizer stays batch * length.
    """
    batch_targets = _as_batch_targets(targets)
    if not outputs:
        raise ValueError("no decoder outputs")
    num_steps = len(outputs)
    batch_size = outputs[0].aspect_start_probs.shape[0]
    if len(batch_targets) != batch_size:
        raise ValueError(
            f"{len(batch_targets)} target sequences for batch of {batch_size}"
        )
    if any(len(seq) != num_steps for seq in batch_targets):
        raise ValueError("target sequence length differs from decoder steps")

    device = outputs[0].aspect_start_probs.device
    dtype = outputs[0].aspect_start_probs.dtype

    def index_tensor(get) -> torch.Tensor:
        rows = [[max(get(step), 0) for step in seq] for seq in batch_targets]
        return torch.tensor(rows, dtype=torch.long, device=device)

    aspect_start = index_tensor(lambda s: s.aspect_start)
    aspect_end = index_tensor(lambda s: s.aspect_end)
    opinion_start = index_tensor(lambda s: s.opinion_start)
    opinion_end = index_tensor(lambda s: s.opinion_end)
    sentiment = index_tensor(lambda s: SENTIMENT_TO_INDEX[s.sentiment])

    pointer_mask = torch.zeros(batch_size, num_steps, dtype=dtype, device=device)
    active_mask = torch.zeros(batch_size, num_steps, dtype=dtype, device=device)
    for b, seq in enumerate(batch_targets):
        stopped = False
        for j, step in enumerate(seq):
            if stopped:
                continue
            active_mask[b, j] = 1.0
            if step.sentiment is SentimentLabel.NONE:
                stopped = True
            else:
                pointer_mask[b, j] = 1.0

    total = torch.zeros((), dtype=dtype, device=device)
    for j, out in enumerate(outputs):
        def log_at(probs: torch.Tensor, idx: torch.Tensor) -> torch.Tensor:
            picked = probs.gather(1, idx[:, j : j + 1]).squeeze(1)
            return torch.log(picked.clamp_min(PROB_FLOOR))

        pointer_term = (
            log_at(out.aspect_start_probs, aspect_start)
            + log_at(out.aspect_end_probs, aspect_end)
            + log_at(out.opinion_start_probs, opinion_start)
            + log_at(out.opinion_end_probs, opinion_end)
        )
        sentiment_term = log_at(out.sentiment_probs, sentiment)
        total = total + (
            pointer_mask[:, j] * pointer_term + active_mask[:, j] * sentiment_term
        ).sum()
    return -total / (batch_size * num_steps)


@dataclass
class TrainResult:
    """Outcome of a single seeded training run."""

    model: TripletExtractionModel
    model_config: ModelConfig
    best_dev_f1: float
    best_epoch: int
    log: list[dict] = field(default_factory=list)
    checkpoint_path: Path | None = None
    wall_clock_sec: float = 0.0


def resolve_max_steps(
    config: ModelConfig, train_sentences: Sequence[AnnotatedSentence]
) -> ModelConfig:
    """Default the inference step cap to (longest gold triplet set) + 2."""
    if config.max_steps is not None:
        return config
    longest = max(len(s.gold) for s in train_sentences)
    return replace(config, max_steps=longest + 2)


def _check_finite(
    loss: torch.Tensor, epoch: int, batch_index: int, model: TripletExtractionModel
) -> None:
    if torch.isfinite(loss):
        return
    norms = {
        name: float(param.detach().norm()) for name, param in model.named_parameters()
    }
    raise RuntimeError(
        f"non-finite loss {loss.item()} at epoch {epoch}, batch {batch_index}; "
        f"parameter norms: {json.dumps(norms, sort_keys=True)}"
    )


def _dev_metrics(
    model: TripletExtractionModel,
    vocab: Vocabulary,
    sentences: Sequence[AnnotatedSentence],
) -> tuple[float, float, float]:
    predictions = predict_corpus(model, vocab, sentences)
    gold = [list(s.gold) for s in sentences]
    return score_exact_match(predictions, gold)


def train(
    train_sentences: Sequence[AnnotatedSentence],
    dev_sentences: Sequence[AnnotatedSentence],
    vocab: Vocabulary,
    model_config: ModelConfig,
    train_config: TrainConfig,
    out_dir: str | Path | None = None,
    run_name: str = "run",
    quiet: bool = False,
) -> TrainResult:
    """One seeded training run with best-dev-F1 model selection.

    Writes ``<run_name>.pt`` (checkpoint) and ``<run_name>_log.jsonl`` under
    ``out_dir`` when given. The returned model carries the best weights.
    """
    started = time.monotonic()
    seed_everything(train_config.seed)
    model_config = resolve_max_steps(model_config, train_sentences)
    model = TripletExtractionModel(model_config, vocab)
    optimizer = torch.optim.Adam(
        model.parameters(),
        lr=train_config.learning_rate,
        weight_decay=train_config.weight_decay,
    )
    rng = random.Random(train_config.seed)
    # separate stream so enabling the random-order ablation does not shift
    # the sentence-shuffle sequence of an otherwise identical run
    target_rng = random.Random(train_config.seed + 0x9E3779B9)
    order = list(range(len(train_sentences)))
    direction = model_config.direction

    best_f1 = -1.0
    best_epoch = -1
    best_state = None
    log: list[dict] = []
    for epoch in range(1, train_config.epochs + 1):
        model.train()
        rng.shuffle(order)
        epoch_loss = 0.0
        num_batches = 0
        for start in range(0, len(order), train_config.batch_size):
            chunk = [train_sentences[i] for i in order[start : start + train_config.batch_size]]
            longest = max(len(s.gold) for s in chunk) + 1
            targets = []
            for sentence in chunk:
                gold = list(sentence.gold)
                if train_config.shuffle_targets:
                    target_rng.shuffle(gold)
                    targets.append(
                        build_target_sequence(gold, direction, longest, sort=False)
                    )
                else:
                    targets.append(build_target_sequence(gold, direction, longest))
            batch = make_batch(chunk, vocab)
            outputs = model(batch, steps=longest)
            loss = compute_loss(outputs, targets)
            _check_finite(loss, epoch, num_batches, model)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            num_batches += 1

        model.eval()
        dev_p, dev_r, dev_f1 = _dev_metrics(model, vocab, dev_sentences)
        record = {
            "epoch": epoch,
            "train_loss": epoch_loss / max(num_batches, 1),
            "dev_p": dev_p,
            "dev_r": dev_r,
            "dev_f1": dev_f1,
        }
        log.append(record)
        if not quiet:
            print(
                f"epoch {epoch}: loss={record['train_loss']:.4f} "
                f"dev P/R/F1={dev_p:.3f}/{dev_r:.3f}/{dev_f1:.3f}"
            )
        if dev_f1 > best_f1:
            best_f1 = dev_f1
            best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())

    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()

    checkpoint_path = None
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        checkpoint_path = out_dir / f"{run_name}.pt"
        save_checkpoint(
            checkpoint_path,
            model,
            vocab,
            extra={
                "train_config": train_config.to_dict(),
                "best_dev_f1": best_f1,
                "best_epoch": best_epoch,
            },
        )
        log_path = out_dir / f"{run_name}_log.jsonl"
        with open(log_path, "w", encoding="utf-8") as handle:
            for record in log:
                handle.write(json.dumps(record) + "\n")
        if not quiet:
            print(
                f"checkpoint {checkpoint_path} (selected by best dev "
                f"exact-match F1 = {best_f1:.4f}, epoch {best_epoch})"
            )

    return TrainResult(
        model=model,
        model_config=model_config,
        best_dev_f1=best_f1,
        best_epoch=best_epoch,
        log=log,
        checkpoint_path=checkpoint_path,
        wall_clock_sec=time.monotonic() - started,
    )


def gradient_check(
    model: TripletExtractionModel,
    batch: SentenceBatch,
    targets: Sequence[Sequence[TargetStep]],
    step: float = 1e-5,
    only: Sequence[str] | None = None,
) -> float:
    """Max guarded relative error between autograd and central differences.

    Relative error per element is |a - b| / max(|a|, |b|, 1e-3): the floor
    keeps finite-difference noise on near-zero gradients from dominating
    while entries of ordinary magnitude are compared relatively. Requires a
    float64 model; dropout must be inactive for the loss to be deterministic.
    ``only`` restricts the sweep to parameter names containing any of the
    given substrings (None checks every tensor).
    """
    if next(model.parameters()).dtype != torch.float64:
        raise ValueError("gradient_check requires a float64 model")
    targets = _as_batch_targets(targets)
    num_steps = len(targets[0])

    model.eval()
    loss = compute_loss(model(batch, steps=num_steps), targets)
    model.zero_grad()
    loss.backward()
    analytic = {
        name: (
            param.grad.detach().clone()
            if param.grad is not None
            else torch.zeros_like(param)
        )
        for name, param in model.named_parameters()
    }

    def loss_value() -> float:
        with torch.no_grad():
            return float(compute_loss(model(batch, steps=num_steps), targets))

    worst = 0.0
    with torch.no_grad():
        for name, param in model.named_parameters():
            if only is not None and not any(part in name for part in only):
                continue
            flat = param.data.view(-1)
            grads = analytic[name].view(-1)
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + step
                upper = loss_value()
                flat[i] = original - step
                lower = loss_value()
                flat[i] = original
                numeric = (upper - lower) / (2 * step)
                exact = grads[i].item()
                denom = max(abs(exact), abs(numeric), 1e-3)
                worst = max(worst, abs(exact - numeric) / denom)
    return worst

"""Self-describing model checkpoints: config + vocabulary + parameters."""

from __future__ import annotations

from pathlib import Path

import torch

from .corpus import Vocabulary
from .model import ModelConfig, TripletExtractionModel


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(
    path: str | Path,
    model: TripletExtractionModel,
    vocab: Vocabulary,
    extra: dict | None = None,
) -> None:
    payload = {
        "format": "paste-aste-checkpoint-v1",
        "model_config": model.config.to_dict(),
        "vocab": vocab.to_dict(),
        "state_dict": model.state_dict(),
        "extra": extra or {},
    }
    torch.save(payload, path)


def load_checkpoint(
    path: str | Path,
) -> tuple[TripletExtractionModel, Vocabulary, ModelConfig, dict]:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("format") != "paste-aste-checkpoint-v1":
        raise CheckpointError(f"{path} is not a recognized checkpoint")
    config = ModelConfig.from_dict(payload["model_config"])
    vocab = Vocabulary.from_dict(payload["vocab"])
    model = TripletExtractionModel(config, vocab)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, vocab, config, payload.get("extra", {})


def check_config_consistency(config: ModelConfig, overrides: dict) -> None:
    """Reject CLI flags that disagree with what a checkpoint was built with."""
    stored = config.to_dict()
    conflicts = {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in stored and stored[key] != value:
            conflicts[key] = (stored[key], value)
    if conflicts:
        detail = ", ".join(
            f"{key}: checkpoint={saved!r} flag={flag!r}"
            for key, (saved, flag) in sorted(conflicts.items())
        )
        raise CheckpointError(f"checkpoint/flag mismatch: {detail}")

from pathlib import Path

import pytest

from paste_aste.corpus import build_vocab, import_dataset
from paste_aste.model import ModelConfig

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def toy_train():
    return import_dataset(DATA_DIR / "toy_train.jsonl", format="canonical")


@pytest.fixture(scope="session")
def toy_dev():
    return import_dataset(DATA_DIR / "toy_dev.jsonl", format="canonical")


@pytest.fixture(scope="session")
def toy_vocab(toy_train):
    return build_vocab(toy_train)


@pytest.fixture
def tiny_config():
    return ModelConfig(
        d_w=8, d_pos=4, d_dep=4, d_h=16, d_p=16, dropout=0.0,
        direction="af", max_steps=4,
    )


@pytest.fixture(scope="session")
def worked_example(toy_train):
    """The 13-token sentence whose three triplets include an overlapping pair."""
    sentence = toy_train[0]
    assert sentence.tokens[0] == "Ambience"
    return sentence

"""Shared fixtures: tiny model configs, hand-built utterances and synthetic corpora."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path, as src/main.py does
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from config.model_config import HMambaConfig  # noqa: E402
from config.run_config import RunConfig  # noqa: E402
from data.corpus_manager import UtteranceRecord  # noqa: E402
from data.synthetic_generator import SyntheticConfig, generate_synthetic  # noqa: E402
from features.providers import FeatureProvider  # noqa: E402

# --set overrides that shrink every command to a few seconds
TINY_OVERRIDES = [
    "model.d=8",
    "model.d_state=4",
    "model.n_phone_blocks=1",
    "model.word_conv_channels=8",
    "model.head_hidden=4",
    "model.n_heads=2",
    "model.max_len=64",
    "train.epochs=2",
    "train.batch_size=4",
    "train.seeds=[1]",
]


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run synthetic-scale acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def tiny_model_config(**changes) -> HMambaConfig:
    """d=8 hierarchy with every stack present."""
    values = dict(
        d=8,
        d_state=4,
        n_phone_blocks=2,
        n_word_blocks=1,
        n_utt_blocks=1,
        word_conv_channels=8,
        head_hidden=4,
        n_heads=2,
        max_len=32,
    )
    values.update(changes)
    return HMambaConfig(**values)


def tiny_run_config(**train_changes) -> RunConfig:
    config = RunConfig.load(overrides=TINY_OVERRIDES)
    for key, value in train_changes.items():
        setattr(config.train, key, value)
    config.validate()
    return config


def make_record(utt_id: str = "utt_a") -> UtteranceRecord:
    """SIL HH AH | L OW with a substitution of AH by AA."""
    return UtteranceRecord(
        utt_id=utt_id,
        phones=["SIL", "HH", "AH", "L", "OW"],
        sil_durations=[0.6, None, None, None, None],
        words=[[1, 2], [3, 4]],
        realized=[None, "HH", "AA", "L", "OW"],
        phone_scores=[None, 2.0, 0.4, 1.8, 1.6],
        word_scores=[
            {"accuracy": 6.0, "stress": 7.0, "total": 6.5},
            {"accuracy": 8.5, "stress": 9.0, "total": 8.75},
        ],
        utterance_scores={
            "accuracy": 7.0,
            "completeness": 9.5,
            "fluency": 8.0,
            "prosody": 7.5,
            "total": 7.5,
        },
        word_texts=["ha", "low"],
    )


def make_providers(records, rng: np.random.Generator):
    """One plain and one SSL provider with random rows for every record."""
    providers = [FeatureProvider("gop", 3, False), FeatureProvider("w2v", 4, True)]
    for record in records:
        for provider in providers:
            provider.blocks[record.utt_id] = rng.normal(0.0, 1.0, (len(record), provider.dim))
    return providers


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    return tiny_model_config()


@pytest.fixture
def record():
    return make_record()


@pytest.fixture
def providers(record, rng):
    return make_providers([record], rng)


@pytest.fixture
def synthetic_dir(tmp_path):
    """Small generated corpus: 16 train and 6 test utterances."""
    out = tmp_path / "synth"
    out.mkdir()
    corpora = generate_synthetic(
        SyntheticConfig(n_utts=16, n_test=6, phones_per_utt=6, error_rate=0.2, noise=0.2, seed=7),
        str(out),
    )
    return out, corpora

"""
Synthetic-scale checks of the whole pipeline. These train real models for
minutes and run only with --runslow.
"""

import numpy as np
import pytest

from conftest import TINY_OVERRIDES
from config.run_config import RunConfig
from core.trainer import Trainer
from core.workflow_manager import WorkflowManager
from data.synthetic_generator import SyntheticConfig, generate_synthetic
from features.providers import FeatureStore

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def synthetic_corpus(tmp_path_factory):
    """1000 training and 200 test utterances of 12 phones, 15% mispronounced."""
    out = tmp_path_factory.mktemp("acceptance") / "data"
    out.mkdir()
    generate_synthetic(SyntheticConfig(n_utts=1000, n_test=200, phones_per_utt=12, error_rate=0.15, seed=0), str(out))
    return out


# =============================================================================
# Learning on synthetic data
# =============================================================================


class TestLearnability:
    def test_default_model_learns_the_planted_signal(self, synthetic_corpus, tmp_path):
        workflow = WorkflowManager(RunConfig.load(overrides=["train.seeds=[1,2,3]"]))
        report = workflow.train(str(synthetic_corpus), str(tmp_path / "run"))
        assert report.apa["phone.accuracy"]["pcc"] >= 0.8
        assert report.mdd["f1"] >= 0.7

    def test_alpha_trades_precision_for_recall(self, synthetic_corpus, tmp_path):
        workflow = WorkflowManager(RunConfig.load(overrides=["train.seeds=[1,2,3]"]))
        rows = workflow.sweep_alpha(str(synthetic_corpus), str(tmp_path / "sweep.json"), [0.0, 0.9])
        plain, weighted = rows
        assert weighted["recall"] >= plain["recall"]
        assert plain["precision"] >= weighted["precision"]


# =============================================================================
# Reproducibility and optimization
# =============================================================================


class TestReproducibility:
    def test_five_seed_report_is_byte_identical(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        generate_synthetic(SyntheticConfig(n_utts=40, n_test=10, phones_per_utt=8, seed=3), str(data))
        overrides = TINY_OVERRIDES + ["train.seeds=[1,2,3,4,5]"]
        for name in ("a", "b"):
            WorkflowManager(RunConfig.load(overrides=overrides)).train(str(data), str(tmp_path / name))
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()

    def test_single_utterance_overfits(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        corpora = generate_synthetic(SyntheticConfig(n_utts=1, n_test=0, seed=4), str(data))
        config = RunConfig.load(overrides=TINY_OVERRIDES + [
            "model.ssl_dropout=0.0",
            "train.epochs=50",
            "train.batch_size=1",
            "train.dev_fraction_buckets=0",
        ])
        store = FeatureStore.load(str(data / "features_train.jsonl"))
        history = Trainer(config, corpora["train"], store, 1, str(tmp_path / "run")).run()
        losses = np.array([row["total"] for row in history if row["kind"] == "step"])
        assert len(losses) == 50
        tail = np.diff(losses[-41:])
        assert np.mean(tail < 0) >= 0.9
        assert losses[-1] < losses[0]

"""Tests for the phone inventory, corpus records and files, score scaling and the synthetic generator."""

import numpy as np
import pytest

from config.constants import DEFAULT_SCORE_RANGES, DELETION, SILENCE, UNKNOWN
from conftest import make_record
from data.corpus_manager import Corpus, UtteranceRecord, load_corpus, save_corpus, validate_record
from data.phone_inventory import PhoneInventory
from data.score_scaler import ScoreScaler, denormalize_scores, normalize_scores
from data.synthetic_generator import REALIZED_PROVIDER, SyntheticConfig, SyntheticGenerator, generate_synthetic, rescore
from features.providers import FeatureStore
from losses.dexent import estimate_frequencies
from metrics import mdd_detection_metrics
from util.file_util import read_json, read_jsonl, write_jsonl
from util.validation import ConfigError, CorpusValidationError, StructureError, ValidationError


def problems_of(record):
    return validate_record(record, PhoneInventory(), DEFAULT_SCORE_RANGES)


# =============================================================================
# Inventory
# =============================================================================


class TestPhoneInventory:
    def test_default_sets(self):
        inventory = PhoneInventory()
        assert SILENCE in inventory.canonical and SILENCE not in inventory.classes
        assert inventory.classes[-1] == DELETION
        assert UNKNOWN in inventory.classes
        assert inventory.n_classes == len(inventory.annotation) + 1

    def test_canonical_phone_maps_to_its_class(self):
        inventory = PhoneInventory()
        assert inventory.classes[inventory.class_of_canonical("AH")] == "AH"
        assert inventory.class_of_canonical(SILENCE) is None
        assert inventory.canonical[inventory.canonical_id("AH")] == "AH"

    @pytest.mark.parametrize(
        "canonical, annotation",
        [
            (["AA"], ["AA"]),
            (["AA", "SIL"], ["AA", "SIL"]),
            (["AA", "SIL"], ["AA", "AA"]),
            (["AA", "B", "SIL"], ["AA"]),
        ],
    )
    def test_invalid_sets(self, canonical, annotation):
        with pytest.raises(ValidationError):
            PhoneInventory(canonical, annotation)

    def test_dict_round_trip(self):
        inventory = PhoneInventory(["AA", "SIL"], ["AA", "AX"])
        restored = PhoneInventory.from_dict(inventory.to_dict())
        assert restored.classes == ["AA", "AX", DELETION]


# =============================================================================
# Records
# =============================================================================


class TestRecordValidation:
    def test_valid_record(self, record):
        assert problems_of(record) == []
        record.check_structure()

    def test_length_mismatch(self, record):
        record.realized = record.realized[:-1]
        assert "realized has 4 entries for 5 phones" in problems_of(record)

    def test_unknown_phones(self, record):
        record.phones[1] = "QQ"
        record.realized[2] = "ZZ"
        found = problems_of(record)
        assert any("unknown canonical phone 'QQ'" in p for p in found)
        assert any("unknown realized phone 'ZZ'" in p for p in found)

    def test_silence_rules(self, record):
        record.sil_durations[0] = None
        record.sil_durations[1] = 0.2
        found = problems_of(record)
        assert any("needs a duration" in p for p in found)
        assert any("carries a silence duration" in p for p in found)

    def test_word_structure(self, record):
        record.words = [[1, 3], [2, 4]]
        found = problems_of(record)
        assert any("not contiguous" in p for p in found)
        with pytest.raises(StructureError):
            record.check_structure()

    def test_word_covering_silence(self, record):
        record.words = [[0, 1, 2], [3, 4]]
        assert any("covers silence" in p for p in problems_of(record))

    def test_scores_outside_range(self, record):
        record.phone_scores[1] = 2.5
        record.utterance_scores["fluency"] = -1.0
        found = problems_of(record)
        assert any("phone.accuracy score 2.5" in p for p in found)
        assert any("utterance.fluency score -1.0" in p for p in found)

    def test_missing_labels_are_allowed(self, record):
        record.phone_scores[2] = None
        record.word_scores[1]["stress"] = None
        record.utterance_scores["prosody"] = None
        assert problems_of(record) == []

    def test_missing_aspect_key(self, record):
        del record.word_scores[0]["stress"]
        assert "word 0 lacks the stress score" in problems_of(record)

    def test_word_index(self, record):
        assert record.word_index() == [None, 0, 0, 1, 1]
        assert record.scored_positions == [1, 2, 3, 4]

    def test_malformed_dict(self):
        with pytest.raises(ValidationError):
            UtteranceRecord.from_dict({"utt_id": "x", "phones": []})


class TestCorpusFile:
    def test_round_trip(self, tmp_path):
        path = str(tmp_path / "corpus_train.jsonl")
        corpus = Corpus([make_record("a"), make_record("b")], feature_file="features_train.jsonl")
        save_corpus(path, corpus)
        loaded = load_corpus(path)
        assert [r.utt_id for r in loaded] == ["a", "b"]
        assert loaded.feature_file == "features_train.jsonl"
        assert loaded[1].to_dict() == make_record("b").to_dict()

    def test_every_bad_record_is_listed(self, tmp_path):
        bad = make_record("bad")
        bad.phone_scores[1] = 9.0
        dup = make_record("a")
        path = str(tmp_path / "corpus_train.jsonl")
        save_corpus(path, Corpus([make_record("a"), bad, dup]))
        with pytest.raises(CorpusValidationError) as info:
            load_corpus(path)
        assert set(info.value.problems) == {"a", "bad"}
        assert info.value.problems["a"] == ["duplicate utt_id"]

    def test_header_is_required(self, tmp_path):
        path = str(tmp_path / "corpus_train.jsonl")
        write_jsonl(path, [make_record().to_dict()])
        with pytest.raises(ValidationError):
            load_corpus(path)

    def test_version_is_checked(self, tmp_path):
        path = str(tmp_path / "corpus_train.jsonl")
        save_corpus(path, Corpus([make_record()]))
        rows = read_jsonl(path)
        rows[0]["version"] = 99
        write_jsonl(path, rows)
        with pytest.raises(ValidationError):
            load_corpus(path)


# =============================================================================
# Score scaling
# =============================================================================


class TestScoreScaler:
    def test_linear_map(self):
        scaler = ScoreScaler(DEFAULT_SCORE_RANGES)
        assert scaler.normalize("phone.accuracy", 1.5) == pytest.approx(0.75)
        assert scaler.denormalize("word.total", 0.25) == pytest.approx(2.5)
        assert scaler.normalize("word.total", None) is None

    def test_record_round_trip(self, record):
        scaler = ScoreScaler(DEFAULT_SCORE_RANGES)
        normalized = normalize_scores(record, scaler)
        assert normalized.phone_scores[1] == pytest.approx(1.0)
        assert normalized.utterance_scores["completeness"] == pytest.approx(0.95)
        assert record.phone_scores[1] == 2.0
        restored = denormalize_scores(normalized, scaler)
        np.testing.assert_allclose(restored.phone_scores[1:], record.phone_scores[1:])
        assert restored.word_scores[1]["total"] == pytest.approx(8.75)

    def test_bad_ranges(self):
        with pytest.raises(ValidationError):
            ScoreScaler({"phone.accuracy": [2.0, 2.0]})
        with pytest.raises(ValidationError):
            ScoreScaler({"phone.accuracy": [0.0, 2.0]}).check_covers()
        with pytest.raises(ValidationError):
            ScoreScaler({}).normalize("word.stress", 1.0)


# =============================================================================
# Synthetic corpus
# =============================================================================


class TestSyntheticGenerator:
    def test_splits_are_valid(self, synthetic_dir):
        out, corpora = synthetic_dir
        assert len(corpora["train"]) == 16 and len(corpora["test"]) == 6
        for split in ("train", "test"):
            loaded = load_corpus(str(out / f"corpus_{split}.jsonl"))
            assert all(SILENCE == r.phones[0] == r.phones[-1] for r in loaded)
            assert all(len(r) - r.phones.count(SILENCE) == 6 for r in loaded)

    def test_features_align_with_records(self, synthetic_dir):
        out, corpora = synthetic_dir
        store = FeatureStore.load(str(out / "features_test.jsonl"))
        assert store.manifest[0] == "gop"
        for record in corpora["test"]:
            for provider in store.providers:
                assert provider.blocks[record.utt_id].shape[0] == len(record)

    def test_same_seed_same_bytes(self, synthetic_dir, tmp_path):
        out, _ = synthetic_dir
        again = tmp_path / "again"
        again.mkdir()
        generate_synthetic(
            SyntheticConfig(n_utts=16, n_test=6, phones_per_utt=6, error_rate=0.2, noise=0.2, seed=7), str(again)
        )
        for name in ("corpus_train.jsonl", "corpus_test.jsonl", "features_train.jsonl", "sample_utterance.json"):
            assert (out / name).read_bytes() == (again / name).read_bytes(), name

    def test_scores_follow_the_latent_formulas(self, synthetic_dir):
        _, corpora = synthetic_dir
        for record in corpora["train"]:
            phone_scores, word_scores, utterance_scores = rescore(
                record.phones, record.realized, record.words, record.latent
            )
            assert phone_scores == record.phone_scores
            assert word_scores == record.word_scores
            assert utterance_scores == record.utterance_scores

    def test_errors_are_planted(self, synthetic_dir):
        _, corpora = synthetic_dir
        errors = sum(
            record.realized[t] != record.phones[t] for record in corpora["train"] for t in record.scored_positions
        )
        assert errors > 0

    def test_sample_utterance(self, synthetic_dir):
        out, corpora = synthetic_dir
        sample = read_json(str(out / "sample_utterance.json"))
        assert sample["record"]["utt_id"] == corpora["test"][0].utt_id
        assert len(sample["features"]["rows"]) == len(corpora["test"][0])

    def test_bad_config(self, tmp_path):
        with pytest.raises(ConfigError):
            generate_synthetic(SyntheticConfig(error_rate=1.0), str(tmp_path))

    def test_mispronunciation_rate(self):
        generator = SyntheticGenerator(SyntheticConfig(error_rate=0.15, seed=11))
        records = [generator.make_record(f"u{i}") for i in range(900)]
        assert sum(len(r.scored_positions) for r in records) >= 10_000
        mu_m, mu_h = estimate_frequencies(records)
        assert abs(mu_m - 0.15) <= 0.01
        assert mu_m + mu_h == pytest.approx(1.0)

    def test_noise_free_realized_block_is_a_perfect_diagnosis(self):
        generator = SyntheticGenerator(SyntheticConfig(noise=0.0, seed=5))
        classes = generator.inventory.classes
        diagnosis, canonical, realized = [], [], []
        for i in range(200):
            record = generator.make_record(f"u{i}")
            block = generator.make_features(record)[REALIZED_PROVIDER]
            for t in record.scored_positions:
                diagnosis.append(classes[int(np.argmax(block[t]))])
                canonical.append(record.phones[t])
                realized.append(record.realized[t])
        scores = mdd_detection_metrics(diagnosis, canonical, realized)
        assert scores.counts.tp > 0
        assert (scores.precision, scores.recall, scores.f1) == (1.0, 1.0, 1.0)

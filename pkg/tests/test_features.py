"""Tests for feature providers, feature assembly and the phonological embeddings."""

import numpy as np
import pytest

from conftest import make_providers, make_record, tiny_model_config
from data.phone_inventory import PhoneInventory
from features.assembly import assemble_features, project
from features.embeddings import RELATIVE_IDS, PhonologicalEmbeddings, phone_level_input, relative_tokens
from features.providers import FeatureProvider, FeatureStore, default_manifest, feature_line, save_features
from numerics.tensor import DiffTensor
from util.validation import AlignmentError, CapacityError, DimensionError, StructureError, ValidationError


class TestRelativeTokens:
    def test_two_phone_words_and_long_silence(self, record):
        assert relative_tokens(record) == ["LS", "B", "E", "B", "E"]

    def test_single_and_middle_phones_and_short_silence(self, record):
        record.phones = ["SIL", "AH", "SIL", "K", "AE", "T"]
        record.sil_durations = [0.2, None, 0.495, None, None, None]
        record.words = [[1], [3, 4, 5]]
        assert relative_tokens(record) == ["SS", "S", "SS", "B", "I", "E"]

    def test_threshold_is_strict(self, record):
        record.sil_durations[0] = 0.496
        assert relative_tokens(record, long_sil_threshold=0.495)[0] == "LS"

    def test_uncovered_phone(self, record):
        record.words = [[1, 2]]
        with pytest.raises(StructureError):
            relative_tokens(record)


class TestPhonologicalEmbeddings:
    def test_input_is_the_sum_of_the_tables(self, record, rng):
        config = tiny_model_config()
        inventory = PhoneInventory()
        tables = PhonologicalEmbeddings(config, inventory.n_canonical, rng)
        x = rng.normal(0.0, 1.0, (len(record), config.d))
        out = phone_level_input(DiffTensor(x), record, tables, inventory).values

        ids = inventory.encode_canonical(record.phones)
        rel = [RELATIVE_IDS[t] for t in relative_tokens(record)]
        expected = (
            x
            + tables.phone.values[ids]
            + tables.absolute.values[: len(record)]
            + tables.relative.values[rel]
        )
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_switched_off_tables(self, record, rng):
        config = tiny_model_config(use_phone_embedding=False, use_abs_embedding=False, use_rel_embedding=False)
        tables = PhonologicalEmbeddings(config, PhoneInventory().n_canonical, rng)
        assert tables.num_parameters() == 0
        x = DiffTensor(rng.normal(0.0, 1.0, (len(record), config.d)))
        np.testing.assert_array_equal(phone_level_input(x, record, tables, PhoneInventory()).values, x.values)

    def test_table_sizes(self, rng):
        config = tiny_model_config(max_len=20)
        tables = PhonologicalEmbeddings(config, 40, rng)
        assert tables.phone.shape == (40, 8)
        assert tables.absolute.shape == (20, 8)
        assert tables.relative.shape == (6, 8)

    def test_capacity(self, record, rng):
        config = tiny_model_config(max_len=4)
        tables = PhonologicalEmbeddings(config, PhoneInventory().n_canonical, rng)
        with pytest.raises(CapacityError):
            phone_level_input(DiffTensor(np.zeros((5, 8))), record, tables, PhoneInventory())


class TestAssembly:
    def test_manifest_order_and_width(self, record, providers):
        bundle = assemble_features(record, providers, False, None, manifest=["w2v", "gop"])
        assert bundle.width == 7 and bundle.n_rows == len(record)
        assert [b.name for b in bundle.layout] == ["w2v", "gop"]
        np.testing.assert_array_equal(bundle.columns_of("gop"), providers[0].blocks[record.utt_id])
        np.testing.assert_array_equal(bundle.matrix.values[:, :4], providers[1].blocks[record.utt_id])

    @pytest.mark.parametrize("training", [False, True])
    def test_registration_order_does_not_matter(self, record, rng, training):
        providers = make_providers([record], rng)
        for name, dim, is_ssl in (("energy", 2, False), ("hubert", 3, True)):
            provider = FeatureProvider(name, dim, is_ssl)
            provider.blocks[record.utt_id] = rng.normal(0.0, 1.0, (len(record), dim))
            providers.append(provider)
        manifest = ["gop", "energy", "w2v", "hubert"]
        base = assemble_features(record, providers, training, np.random.default_rng(3), manifest=manifest)
        for order in ([3, 1, 0, 2], [2, 3, 1, 0], [1, 0, 3, 2]):
            shuffled = [providers[i] for i in order]
            bundle = assemble_features(record, shuffled, training, np.random.default_rng(3), manifest=manifest)
            assert bundle.layout == base.layout
            np.testing.assert_array_equal(bundle.matrix.values, base.matrix.values)

    def test_dropout_only_touches_ssl_blocks(self, record, providers):
        bundle = assemble_features(record, providers, True, np.random.default_rng(0), ssl_dropout=0.5)
        np.testing.assert_array_equal(bundle.columns_of("gop"), providers[0].blocks[record.utt_id])
        w2v = bundle.columns_of("w2v")
        raw = providers[1].blocks[record.utt_id]
        assert np.any(w2v == 0.0)
        kept = w2v != 0.0
        np.testing.assert_allclose(w2v[kept], 2.0 * raw[kept])

    def test_eval_mode_is_deterministic(self, record, providers):
        a = assemble_features(record, providers, False, None)
        b = assemble_features(record, providers, False, None)
        np.testing.assert_array_equal(a.matrix.values, b.matrix.values)

    def test_row_count_mismatch(self, record, providers):
        providers[0].blocks[record.utt_id] = np.zeros((4, 3))
        with pytest.raises(AlignmentError):
            assemble_features(record, providers, False, None)

    def test_missing_provider(self, record, providers):
        with pytest.raises(AlignmentError):
            assemble_features(record, providers, False, None, manifest=["gop", "hubert"])

    def test_project(self, record, providers, rng):
        bundle = assemble_features(record, providers, False, None)
        W, b = rng.normal(0.0, 1.0, (7, 8)), rng.normal(0.0, 1.0, 8)
        out = project(bundle, DiffTensor(W), DiffTensor(b))
        np.testing.assert_allclose(out.values, bundle.matrix.values @ W + b)
        with pytest.raises(DimensionError):
            project(bundle, DiffTensor(W[:6]), DiffTensor(b))


class TestFeatureStore:
    def test_unknown_provider_name(self):
        with pytest.raises(ValidationError):
            FeatureProvider("mfcc", 13)
        assert FeatureProvider("synthetic:anything", 2).dim == 2

    def test_default_manifest(self):
        assert default_manifest(["synthetic:z", "wavlm", "gop", "synthetic:a"]) == [
            "gop",
            "wavlm",
            "synthetic:a",
            "synthetic:z",
        ]

    def test_file_round_trip(self, tmp_path, rng):
        records = [make_record("u1"), make_record("u2")]
        providers = make_providers(records, rng)
        path = str(tmp_path / "features.jsonl")
        save_features(path, ["u1", "u2"], providers)
        store = FeatureStore.load(path)
        assert store.manifest == ["gop", "w2v"] and store.width == 7
        np.testing.assert_allclose(
            store.providers[1].blocks["u2"], providers[1].blocks["u2"], atol=1e-6
        )

    def test_select(self, record, providers):
        store = FeatureStore(providers)
        assert [p.name for p in store.select(["w2v"])] == ["gop"]
        with pytest.raises(ValidationError):
            store.select(["hubert"])
        with pytest.raises(ValidationError):
            store.select(["gop", "w2v"])

    def test_rows_of_the_wrong_width(self, record, providers):
        line = feature_line(record.utt_id, providers)
        line["rows"] = [row[:-1] for row in line["rows"]]
        with pytest.raises(AlignmentError):
            FeatureStore.from_rows([line])

    def test_manifest_must_not_change(self, rng):
        records = [make_record("u1"), make_record("u2")]
        providers = make_providers(records, rng)
        first = feature_line("u1", providers)
        second = feature_line("u2", providers)
        second["providers"][0]["is_ssl"] = True
        with pytest.raises(ValidationError):
            FeatureStore.from_rows([first, second])

"""Synthetic aligned corpus with planted, learnable signal."""

import os
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.constants import (
    DEFAULT_SCORE_RANGES,
    FEATURE_FILE,
    FEATURE_PROVIDERS,
    SAMPLE_UTTERANCE_FILE,
    SILENCE,
    SYNTHETIC_PREFIX,
    UTTERANCE_ASPECTS,
)
from data.corpus_manager import Corpus, UtteranceRecord, corpus_path, save_corpus
from data.phone_inventory import PhoneInventory
from features.providers import FeatureProvider, feature_line, save_features
from util.file_util import write_json
from util.log_util import get_logger
from util.rng_util import named_rng
from util.validation import ConfigError

logger = get_logger("data.synthetic")

REALIZED_PROVIDER = SYNTHETIC_PREFIX + "realized"
QUALITY_PROVIDER = SYNTHETIC_PREFIX + "quality"
STRESS_JITTER_STD = 0.5
UTTERANCE_NOISE_STD = 0.5
PAUSE_PROBABILITY = 0.2
SILENCE_RANGE = (0.05, 1.0)

# Written into the corpus header so stored scores can be re-derived from `latent`
SCORE_FORMULAS = {
    "phone.accuracy": "2 * (0.4 * latent.quality[t] + 0.6 * correct[t]), correct = realized == canonical",
    "word.accuracy": "5 * mean(phone.accuracy over the word)",
    "word.stress": "clip(word.accuracy + latent.stress_jitter[w], 0, 10)",
    "word.total": "(word.accuracy + word.stress) / 2",
    "utterance.<aspect>": "clip(mean(word.total) + latent.utterance_noise[aspect], 0, 10)",
    "features": {
        REALIZED_PROVIDER: "one_hot(class_id(realized)) + noise * N(0, 1); zeros + noise at SIL",
        QUALITY_PROVIDER: "latent.quality + noise * N(0, 1); 0 + noise at SIL",
        "gop": "column 0 = 0.6 * correct + 0.4 * quality + noise * N(0, 1); other columns N(0, 1)",
        "duration": "silence duration at SIL, U(0.05, 0.3) elsewhere",
        "energy/w2v/hubert/wavlm": "N(0, 1)",
    },
}


@dataclass
class SyntheticConfig:
    n_utts: int = 100
    n_test: int = 20
    phones_per_utt: int = 12
    error_rate: float = 0.15
    noise: float = 0.3
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if not 0.0 <= self.error_rate < 1.0:
            problems.append("error_rate must be in [0, 1)")
        if self.n_utts < 1 or self.n_test < 0:
            problems.append("n_utts must be >= 1 and n_test >= 0")
        if self.phones_per_utt < 1:
            problems.append("phones_per_utt must be >= 1")
        if self.noise < 0:
            problems.append("noise must be >= 0")
        if problems:
            raise ConfigError("synthetic config: " + "; ".join(problems))


def _clip(value: float) -> float:
    return float(min(10.0, max(0.0, value)))


def rescore(phones: List[str], realized: List[Optional[str]], words: List[List[int]], latent: Dict):
    """
    Evaluate the header formulas on a record's latent draws.

    Returns:
        tuple: (phone_scores, word_scores, utterance_scores)
    """

    quality = latent["quality"]
    phone_scores: List[Optional[float]] = [
        None if phone == SILENCE else 2.0 * (0.4 * quality[t] + 0.6 * float(realized[t] == phone))
        for t, phone in enumerate(phones)
    ]
    word_scores = []
    for w, positions in enumerate(words):
        accuracy = 5.0 * float(np.mean([phone_scores[t] for t in positions]))
        stress = _clip(accuracy + latent["stress_jitter"][w])
        word_scores.append({"accuracy": accuracy, "stress": stress, "total": (accuracy + stress) / 2.0})
    base = float(np.mean([s["total"] for s in word_scores]))
    utterance_scores = {
        aspect: _clip(base + latent["utterance_noise"][aspect]) for aspect in UTTERANCE_ASPECTS
    }
    return phone_scores, word_scores, utterance_scores


class SyntheticGenerator:
    """Draws utterances and their feature rows from one named random stream per split."""

    def __init__(self, config: SyntheticConfig, inventory: Optional[PhoneInventory] = None):
        config.validate()
        self.config = config
        self.inventory = inventory or PhoneInventory()
        self.rng = named_rng(config.seed, "generator")

    def _layout(self, n: int) -> Tuple[List[str], List[List[int]]]:
        """Phone slots (SIL or None for a phone) and word positions."""
        rng = self.rng
        slots: List[Optional[str]] = [SILENCE]
        words: List[List[int]] = []
        n_phones = 0
        while n_phones < n:
            if words and rng.random() < PAUSE_PROBABILITY:
                slots.append(SILENCE)
            length = int(min(rng.integers(1, 5), n - n_phones))
            start = len(slots)
            slots.extend([None] * length)
            words.append(list(range(start, start + length)))
            n_phones += length
        slots.append(SILENCE)
        return slots, words

    def _realize(self, canonical: str) -> str:
        if self.rng.random() >= self.config.error_rate:
            return canonical
        others = [c for c in self.inventory.classes if c != canonical]
        return others[int(self.rng.integers(len(others)))]

    def make_record(self, utt_id: str) -> UtteranceRecord:
        rng = self.rng
        slots, words = self._layout(self.config.phones_per_utt)
        phones, durations, realized, quality = [], [], [], []
        prompt_phones = [p for p in self.inventory.canonical if p != SILENCE]
        for slot in slots:
            if slot == SILENCE:
                phones.append(SILENCE)
                durations.append(float(rng.uniform(*SILENCE_RANGE)))
                realized.append(None)
                quality.append(None)
            else:
                phone = prompt_phones[int(rng.integers(len(prompt_phones)))]
                phones.append(phone)
                durations.append(None)
                realized.append(self._realize(phone))
                quality.append(float(rng.uniform(0.0, 1.0)))

        latent = {
            "quality": quality,
            "stress_jitter": [float(rng.normal(0.0, STRESS_JITTER_STD)) for _ in words],
            "utterance_noise": {
                aspect: float(rng.normal(0.0, UTTERANCE_NOISE_STD)) for aspect in UTTERANCE_ASPECTS
            },
        }
        phone_scores, word_scores, utterance_scores = rescore(phones, realized, words, latent)
        return UtteranceRecord(
            utt_id=utt_id,
            phones=phones,
            sil_durations=durations,
            words=words,
            realized=realized,
            phone_scores=phone_scores,
            word_scores=word_scores,
            utterance_scores=utterance_scores,
            word_texts=["".join(phones[t] for t in positions).lower() for positions in words],
            latent=latent,
        )

    def make_features(self, record: UtteranceRecord) -> Dict[str, np.ndarray]:
        """Feature blocks of one record keyed by provider name."""
        rng = self.rng
        noise = self.config.noise
        n = len(record)
        correct = np.array([
            0.0 if p == SILENCE else float(record.realized[t] == p) for t, p in enumerate(record.phones)
        ])
        quality = np.array([q if q is not None else 0.0 for q in record.latent["quality"]])

        realized = np.zeros((n, self.inventory.n_classes))
        for t, phone in enumerate(record.realized):
            if phone is not None:
                realized[t, self.inventory.class_id(phone)] = 1.0

        blocks = {}
        for name, dim, _ in FEATURE_PROVIDERS:
            blocks[name] = rng.normal(0.0, 1.0, (n, dim))
        blocks["gop"][:, 0] = 0.6 * correct + 0.4 * quality + noise * rng.normal(0.0, 1.0, n)
        blocks["duration"][:, 0] = [
            d if d is not None else float(rng.uniform(0.05, 0.3)) for d in record.sil_durations
        ]
        blocks[REALIZED_PROVIDER] = realized + noise * rng.normal(0.0, 1.0, realized.shape)
        blocks[QUALITY_PROVIDER] = (quality + noise * rng.normal(0.0, 1.0, n))[:, None]
        return blocks

    def generate_split(self, split: str, n_utts: int) -> Tuple[List[UtteranceRecord], List[FeatureProvider]]:
        """Records and providers of one split, drawn from the stream `generator:{split}`."""
        self.rng = named_rng(self.config.seed, f"generator:{split}")
        providers = [FeatureProvider(name, dim, is_ssl) for name, dim, is_ssl in FEATURE_PROVIDERS]
        providers.append(FeatureProvider(REALIZED_PROVIDER, self.inventory.n_classes, False))
        providers.append(FeatureProvider(QUALITY_PROVIDER, 1, False))
        by_name = {p.name: p for p in providers}

        records = []
        for i in range(n_utts):
            record = self.make_record(f"{split}_{i:05d}")
            for name, block in self.make_features(record).items():
                by_name[name].blocks[record.utt_id] = block
            records.append(record)
        return records, providers

    def header_generator(self) -> Dict:
        return {"config": asdict(self.config), "formulas": SCORE_FORMULAS}


def generate_synthetic(config: SyntheticConfig, out_dir: str) -> Dict[str, Corpus]:
    """
    Write corpus and feature files for the train and test splits plus a sample utterance.

    Parameters:
        config (SyntheticConfig): Sizes, error rate, noise and seed
        out_dir (str): Destination directory (must already be prepared)

    Returns:
        dict: split name -> Corpus
    """

    generator = SyntheticGenerator(config)
    corpora = {}
    sample = None
    for split, n_utts in (("train", config.n_utts), ("test", config.n_test)):
        records, providers = generator.generate_split(split, n_utts)
        feature_file = FEATURE_FILE.format(split=split)
        corpus = Corpus(
            records=records,
            inventory=generator.inventory,
            score_ranges={k: list(v) for k, v in DEFAULT_SCORE_RANGES.items()},
            feature_file=feature_file,
            generator=generator.header_generator(),
        )
        save_corpus(corpus_path(out_dir, split), corpus)
        save_features(os.path.join(out_dir, feature_file), [r.utt_id for r in records], providers)
        corpora[split] = corpus
        if records and (sample is None or split == "test"):
            sample = {
                "record": records[0].to_dict(),
                "features": feature_line(records[0].utt_id, providers),
                "inventory": generator.inventory.to_dict(),
                "score_ranges": corpus.score_ranges,
            }
        logger.info("Generated %d %s utterances", n_utts, split)

    write_json(os.path.join(out_dir, SAMPLE_UTTERANCE_FILE), sample)
    return corpora

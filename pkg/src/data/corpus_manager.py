"""Aligned CAPT corpus records: schema, validation, JSONL load and save."""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional

from config.constants import (
    CORPUS_FILE,
    DEFAULT_SCORE_RANGES,
    FORMAT_VERSION,
    SILENCE,
    UTTERANCE_ASPECTS,
    WORD_ASPECTS,
)
from data.phone_inventory import PhoneInventory
from util.file_util import iter_jsonl, write_jsonl
from util.log_util import get_logger
from util.validation import CorpusValidationError, StructureError, ValidationError

logger = get_logger("data.corpus")

CORPUS_FORMAT = "hmamba-corpus"


@dataclass
class UtteranceRecord:
    """
    One aligned utterance.

    Per-position lists have one entry per canonical phone (SIL included):
    `sil_durations` is set only at SIL, `realized` and `phone_scores` only
    elsewhere. `words` lists the positions of each word; scores may be None
    where a label is missing.
    """

    utt_id: str
    phones: List[str]
    sil_durations: List[Optional[float]]
    words: List[List[int]]
    realized: List[Optional[str]]
    phone_scores: List[Optional[float]]
    word_scores: List[Dict[str, Optional[float]]]
    utterance_scores: Dict[str, Optional[float]]
    word_texts: Optional[List[str]] = None
    latent: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.phones)

    @property
    def scored_positions(self) -> List[int]:
        return [t for t, phone in enumerate(self.phones) if phone != SILENCE]

    def word_index(self) -> List[Optional[int]]:
        """Word number of each position (None at silence)."""
        index: List[Optional[int]] = [None] * len(self.phones)
        for w, positions in enumerate(self.words):
            for t in positions:
                index[t] = w
        return index

    def check_structure(self) -> None:
        """Raise StructureError when words do not partition the non-silence positions."""
        problems = structure_problems(self)
        if problems:
            raise StructureError(f"{self.utt_id}: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "utt_id": self.utt_id,
            "phones": list(self.phones),
            "sil_durations": list(self.sil_durations),
            "words": [list(w) for w in self.words],
            "realized": list(self.realized),
            "phone_scores": list(self.phone_scores),
            "word_scores": [dict(s) for s in self.word_scores],
            "utterance_scores": dict(self.utterance_scores),
        }
        if self.word_texts is not None:
            payload["word_texts"] = list(self.word_texts)
        if self.latent:
            payload["latent"] = self.latent
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "UtteranceRecord":
        try:
            return cls(
                utt_id=str(payload["utt_id"]),
                phones=list(payload["phones"]),
                sil_durations=list(payload["sil_durations"]),
                words=[list(w) for w in payload["words"]],
                realized=list(payload["realized"]),
                phone_scores=list(payload["phone_scores"]),
                word_scores=[dict(s) for s in payload["word_scores"]],
                utterance_scores=dict(payload["utterance_scores"]),
                word_texts=payload.get("word_texts"),
                latent=dict(payload.get("latent") or {}),
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(
                f"{payload.get('utt_id', '<no utt_id>')}: malformed record ({e})"
            ) from e


def structure_problems(record: UtteranceRecord) -> List[str]:
    """Word/silence partition problems of a record (empty when well-formed)."""
    problems = []
    n = len(record.phones)
    covered: Dict[int, int] = {}
    for w, positions in enumerate(record.words):
        if not positions:
            problems.append(f"word {w} is empty")
            continue
        if list(positions) != list(range(positions[0], positions[0] + len(positions))):
            problems.append(f"word {w} is not contiguous: {positions}")
        for t in positions:
            if not 0 <= t < n:
                problems.append(f"word {w} position {t} out of range")
            elif record.phones[t] == SILENCE:
                problems.append(f"word {w} covers silence position {t}")
            elif t in covered:
                problems.append(f"position {t} belongs to words {covered[t]} and {w}")
            else:
                covered[t] = w
    for t, phone in enumerate(record.phones):
        if phone != SILENCE and t not in covered:
            problems.append(f"phone {phone} at position {t} is not covered by any word")
    return problems


def validate_record(
    record: UtteranceRecord, inventory: PhoneInventory, score_ranges: Dict[str, List[float]]
) -> List[str]:
    """
    Collect every invariant violation of one record.

    Parameters:
        record (UtteranceRecord): Record to check
        inventory (PhoneInventory): Declared phone sets
        score_ranges (dict): "granularity.aspect" -> [min, max]

    Returns:
        List[str]: Problems found, empty when valid
    """

    problems = []
    n = len(record.phones)
    if n == 0:
        return ["empty phone sequence"]
    for name in ("sil_durations", "realized", "phone_scores"):
        if len(getattr(record, name)) != n:
            problems.append(f"{name} has {len(getattr(record, name))} entries for {n} phones")
    if problems:
        return problems

    for t, phone in enumerate(record.phones):
        if phone not in inventory.canonical_ids:
            problems.append(f"unknown canonical phone {phone!r} at position {t}")
            continue
        realized = record.realized[t]
        if phone == SILENCE:
            duration = record.sil_durations[t]
            if duration is None or duration < 0:
                problems.append(f"silence at position {t} needs a duration >= 0")
            if realized is not None or record.phone_scores[t] is not None:
                problems.append(f"silence at position {t} must not carry a realized phone or score")
        else:
            if record.sil_durations[t] is not None:
                problems.append(f"non-silence position {t} carries a silence duration")
            if realized not in inventory.class_ids:
                problems.append(f"unknown realized phone {realized!r} at position {t}")

    problems.extend(structure_problems(record))

    if len(record.word_scores) != len(record.words):
        problems.append(f"{len(record.word_scores)} word score sets for {len(record.words)} words")
    if record.word_texts is not None and len(record.word_texts) != len(record.words):
        problems.append("word_texts does not match the word count")

    def check(key: str, value: Optional[float], where: str) -> None:
        if value is None:
            return
        if key not in score_ranges:
            problems.append(f"no declared range for {key}")
            return
        low, high = score_ranges[key]
        if not low <= value <= high:
            problems.append(f"{key} score {value} at {where} outside [{low}, {high}]")

    for t, score in enumerate(record.phone_scores):
        check("phone.accuracy", score, f"position {t}")
    for w, scores in enumerate(record.word_scores):
        for aspect in WORD_ASPECTS:
            if aspect not in scores:
                problems.append(f"word {w} lacks the {aspect} score")
            else:
                check(f"word.{aspect}", scores[aspect], f"word {w}")
    for aspect in UTTERANCE_ASPECTS:
        if aspect not in record.utterance_scores:
            problems.append(f"utterance lacks the {aspect} score")
        else:
            check(f"utterance.{aspect}", record.utterance_scores[aspect], "utterance")
    return problems


@dataclass
class Corpus:
    """Header plus validated records; iterates like a list of records."""

    records: List[UtteranceRecord]
    inventory: PhoneInventory = field(default_factory=PhoneInventory)
    score_ranges: Dict[str, List[float]] = field(default_factory=lambda: dict(DEFAULT_SCORE_RANGES))
    feature_file: Optional[str] = None
    generator: Optional[Dict[str, Any]] = None

    def __iter__(self) -> Iterator[UtteranceRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index):
        return self.records[index]

    def subset(self, records: List[UtteranceRecord]) -> "Corpus":
        return Corpus(records, self.inventory, self.score_ranges, self.feature_file, self.generator)

    def validate(self) -> None:
        """Raise CorpusValidationError listing every offending utt_id."""
        problems: Dict[str, List[str]] = {}
        seen = set()
        for record in self.records:
            found = validate_record(record, self.inventory, self.score_ranges)
            if record.utt_id in seen:
                found.append("duplicate utt_id")
            seen.add(record.utt_id)
            if found:
                problems[record.utt_id] = found
        if problems:
            raise CorpusValidationError(problems)

    def header(self) -> Dict[str, Any]:
        payload = {
            "format": CORPUS_FORMAT,
            "version": FORMAT_VERSION,
            "inventory": self.inventory.to_dict(),
            "score_ranges": self.score_ranges,
            "feature_file": self.feature_file,
        }
        if self.generator:
            payload["generator"] = self.generator
        return payload


def load_corpus(path: str) -> Corpus:
    """
    Load and validate a corpus JSONL file (header line, then one record per line).

    Parameters:
        path (str): Corpus file

    Returns:
        Corpus: Validated records with their header
    """

    rows = iter_jsonl(path)
    header = next(rows, None)
    if not header or header.get("format") != CORPUS_FORMAT:
        raise ValidationError(f"{path}: first line must be a {CORPUS_FORMAT} header")
    if header.get("version") != FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported format version {header.get('version')} (expected {FORMAT_VERSION})"
        )

    corpus = Corpus(
        records=[UtteranceRecord.from_dict(row) for row in rows],
        inventory=PhoneInventory.from_dict(header.get("inventory")),
        score_ranges={k: list(v) for k, v in (header.get("score_ranges") or DEFAULT_SCORE_RANGES).items()},
        feature_file=header.get("feature_file"),
        generator=header.get("generator"),
    )
    corpus.validate()
    logger.info("Loaded %d utterances from %s", len(corpus), path)
    return corpus


def save_corpus(path: str, corpus: Corpus) -> None:
    """Write the header line and one JSON line per record."""
    write_jsonl(path, [corpus.header()] + [record.to_dict() for record in corpus])


def corpus_path(data_dir: str, split: str) -> str:
    return os.path.join(data_dir, CORPUS_FILE.format(split=split))

"""Canonical and annotation phone sets with their id maps."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from config.constants import CMU_PHONES, DELETION, L2_PHONES, SILENCE, UNKNOWN
from util.validation import ValidationError


@dataclass
class PhoneInventory:
    """
    Phone vocabularies of one corpus.

    canonical: prompt phones plus SIL (embedding vocabulary).
    annotation: phones a learner may realize, including [unk].
    classes: annotation + [DEL]; SIL is never a class.
    """

    canonical: List[str] = field(default_factory=lambda: list(CMU_PHONES) + [SILENCE])
    annotation: List[str] = field(
        default_factory=lambda: list(CMU_PHONES) + list(L2_PHONES) + [UNKNOWN]
    )

    def __post_init__(self):
        problems = []
        if SILENCE not in self.canonical:
            problems.append(f"canonical set must contain {SILENCE}")
        if SILENCE in self.annotation or DELETION in self.annotation:
            problems.append(f"annotation set must not contain {SILENCE} or {DELETION}")
        for name, symbols in (("canonical", self.canonical), ("annotation", self.annotation)):
            if len(set(symbols)) != len(symbols):
                problems.append(f"duplicate symbols in the {name} set")
        missing = [p for p in self.canonical if p != SILENCE and p not in self.annotation]
        if missing:
            problems.append(f"canonical phones missing from the annotation set: {missing}")
        if problems:
            raise ValidationError("phone inventory: " + "; ".join(problems))

        self.classes: List[str] = list(self.annotation) + [DELETION]
        self.canonical_ids: Dict[str, int] = {p: i for i, p in enumerate(self.canonical)}
        self.class_ids: Dict[str, int] = {p: i for i, p in enumerate(self.classes)}

    @property
    def n_canonical(self) -> int:
        return len(self.canonical)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def canonical_id(self, phone: str) -> int:
        return self.canonical_ids[phone]

    def class_id(self, phone: str) -> int:
        return self.class_ids[phone]

    def class_of_canonical(self, phone: str) -> Optional[int]:
        """Class id a correctly pronounced canonical phone maps to; None for SIL."""
        return None if phone == SILENCE else self.class_ids[phone]

    def encode_canonical(self, phones: Sequence[str]) -> List[int]:
        return [self.canonical_ids[p] for p in phones]

    def decode_classes(self, ids: Sequence[int]) -> List[str]:
        return [self.classes[int(i)] for i in ids]

    def to_dict(self) -> Dict[str, List[str]]:
        return {"canonical": list(self.canonical), "annotation": list(self.annotation)}

    @classmethod
    def from_dict(cls, payload: Optional[Dict[str, List[str]]]) -> "PhoneInventory":
        if not payload:
            return cls()
        return cls(canonical=list(payload["canonical"]), annotation=list(payload["annotation"]))

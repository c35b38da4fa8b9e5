"""Plain-text score card of one utterance."""

from typing import List, Sequence

from config.constants import SILENCE
from core.evaluator import UtterancePrediction
from data.corpus_manager import UtteranceRecord

CORRECT_MARK = "✓"
ERROR_MARK = "✗"


def _table(rows: Sequence[Sequence[str]], indent: str = "  ") -> List[str]:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return [indent + "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]


def _number(value) -> str:
    return "-" if value is None else f"{value:.2f}"


def format_score_card(record: UtteranceRecord, prediction: UtterancePrediction) -> str:
    """
    Render utterance scores, word scores, phone accuracy and the diagnosis line.

    Silence positions are left out of the phone and diagnosis rows. A position
    is marked ✗ when the recognized phone differs from the canonical one.

    Parameters:
        record (UtteranceRecord): Canonical phones and word layout
        prediction (UtterancePrediction): Denormalized predictions for the record

    Returns:
        str: Multi-line card ending in a newline
    """

    lines = [f"Utterance {record.utt_id}", "", "Utterance-level scores"]
    lines += _table([[aspect, _number(value)] for aspect, value in prediction.utterance_scores.items()])

    lines += ["", "Word-level scores"]
    aspects = list(prediction.word_scores[0]) if prediction.word_scores else []
    header = ["word"] + aspects
    rows = [header]
    for w, scores in enumerate(prediction.word_scores):
        phones = " ".join(record.phones[t] for t in record.words[w])
        name = record.word_texts[w] if record.word_texts else f"w{w}"
        rows.append([f"{name} ({phones})"] + [_number(scores[a]) for a in aspects])
    lines += _table(rows)

    positions = [t for t, phone in enumerate(record.phones) if phone != SILENCE]
    lines += ["", "Phone-level accuracy"]
    lines += _table([
        ["phone"] + [record.phones[t] for t in positions],
        ["score"] + [_number(prediction.phone_scores[t]) for t in positions],
    ])

    lines += ["", "Mispronunciation diagnosis"]
    lines += _table([
        ["Canonical"] + [record.phones[t] for t in positions],
        ["Diagnosed"] + [prediction.diagnosis[t] for t in positions],
        [""] + [ERROR_MARK if prediction.error_states[t] else CORRECT_MARK for t in positions],
    ])
    return "\n".join(lines) + "\n"

"""Run a model over a corpus and turn its predictions into an EvalReport."""

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from config.constants import SILENCE
from data.corpus_manager import Corpus, UtteranceRecord
from data.score_scaler import ScoreScaler
from features.assembly import assemble_features
from features.providers import FeatureProvider
from metrics.apa_metrics import mse, pcc
from metrics.eval_report import EvalReport
from metrics.mdd_metrics import DetectionCounts, ErrorRateResult, detection_counts, per_counts
from model.hmamba import HMambaModel
from model.word_ops import aggregate_word_predictions
from util.file_util import write_jsonl
from util.log_util import get_logger

logger = get_logger("core.evaluator")


@dataclass
class UtterancePrediction:
    """Denormalized predictions for one utterance; None at silence positions."""

    utt_id: str
    phone_scores: List[Optional[float]]
    word_scores: List[Dict[str, float]]
    utterance_scores: Dict[str, float]
    diagnosis: List[Optional[str]]
    error_states: List[bool]
    pooling_weights: List[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "utt_id": self.utt_id,
            "phone_scores": self.phone_scores,
            "word_scores": self.word_scores,
            "utterance_scores": self.utterance_scores,
            "diagnosis": self.diagnosis,
            "error_states": self.error_states,
            "pooling_weights": self.pooling_weights,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "UtterancePrediction":
        return cls(**{key: payload[key] for key in cls.__dataclass_fields__})


def predict(
    model: HMambaModel,
    record: UtteranceRecord,
    providers: Sequence[FeatureProvider],
    scaler: ScoreScaler,
) -> UtterancePrediction:
    """
    Eval-mode forward pass of one utterance with scores mapped back to raw ranges.

    Word scores are the per-word means of the per-phone word predictions.
    """

    config = model.config
    bundle = assemble_features(record, providers, False, None, model.manifest, config.ssl_dropout)
    out = model(record, bundle, training=False)

    phone_key = f"phone.{config.phone_aspects[0]}"
    phone_scores = [
        None if phone == SILENCE else scaler.denormalize(phone_key, float(out.phone_scores.values[t]))
        for t, phone in enumerate(record.phones)
    ]
    per_word = aggregate_word_predictions(out.word_scores, record)
    word_scores = [
        {
            aspect: scaler.denormalize(f"word.{aspect}", float(per_word[w, k]))
            for k, aspect in enumerate(config.word_aspects)
        }
        for w in range(len(record.words))
    ]
    utterance_scores = {
        aspect: scaler.denormalize(f"utterance.{aspect}", float(out.utterance_scores.values[k]))
        for k, aspect in enumerate(config.utterance_aspects)
    }
    decoded = model.inventory.decode_classes(out.diagnosis)
    diagnosis = [None if phone == SILENCE else decoded[t] for t, phone in enumerate(record.phones)]
    return UtterancePrediction(
        utt_id=record.utt_id,
        phone_scores=phone_scores,
        word_scores=word_scores,
        utterance_scores=utterance_scores,
        diagnosis=diagnosis,
        error_states=[bool(e) for e in out.error_states],
        pooling_weights=[float(a) for a in out.pooling_weights.values],
    )


def build_report(
    predictions: Iterable[UtterancePrediction],
    records: Iterable[UtteranceRecord],
    aspects: Dict[str, Sequence[str]],
    seeds: Optional[List[int]] = None,
    run_config: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """
    Pool predictions against raw labels and compute every metric.

    PCC and MSE pool all labelled items per (granularity, aspect); detection
    counts and PER edits pool over positions.

    Parameters:
        predictions (Iterable[UtterancePrediction]): One per record, same order
        records (Iterable[UtteranceRecord]): Labelled utterances (raw scale)
        aspects (dict): granularity -> aspect names
        seeds (List[int], optional): Seeds the report covers
        run_config (dict, optional): Reproducibility stamp

    Returns:
        EvalReport: Report over the whole set
    """

    pooled: Dict[str, tuple] = {
        f"{g}.{aspect}": ([], []) for g, names in aspects.items() for aspect in names
    }
    counts = DetectionCounts()
    errors = ErrorRateResult(0, 0)
    n_utterances = 0

    for prediction, record in zip(predictions, records):
        n_utterances += 1
        for t in record.scored_positions:
            label = record.phone_scores[t]
            if label is not None:
                key = f"phone.{aspects['phone'][0]}"
                pooled[key][0].append(prediction.phone_scores[t])
                pooled[key][1].append(label)
        for w, labels in enumerate(record.word_scores):
            for aspect in aspects["word"]:
                if labels.get(aspect) is not None:
                    pooled[f"word.{aspect}"][0].append(prediction.word_scores[w][aspect])
                    pooled[f"word.{aspect}"][1].append(labels[aspect])
        for aspect in aspects["utterance"]:
            label = record.utterance_scores.get(aspect)
            if label is not None:
                pooled[f"utterance.{aspect}"][0].append(prediction.utterance_scores[aspect])
                pooled[f"utterance.{aspect}"][1].append(label)

        mask = [phone != SILENCE for phone in record.phones]
        counts = counts + detection_counts(prediction.diagnosis, record.phones, record.realized, mask)
        errors = errors + per_counts(prediction.diagnosis, record.realized, mask)

    flags: List[str] = []
    apa = {}
    for key, (pred, target) in pooled.items():
        if not target:
            flags.append(f"{key}: no labels")
            apa[key] = {"pcc": float("nan"), "mse": float("nan")}
            continue
        apa[key] = {"pcc": pcc(pred, target), "mse": mse(pred, target)}
        if np.isnan(apa[key]["pcc"]):
            flags.append(f"{key}: pcc undefined")

    detection = counts.scores()
    flags.extend(detection.flags)
    if not errors.defined:
        flags.append("per_undefined")
    mdd = {
        "precision": detection.precision,
        "recall": detection.recall,
        "f1": detection.f1,
        "per": errors.score,
    }
    return EvalReport(apa, mdd, list(seeds or []), n_utterances, run_config, flags)


def evaluate(
    model: HMambaModel,
    corpus: Corpus,
    providers: Sequence[FeatureProvider],
    seeds: Optional[List[int]] = None,
    run_config: Optional[Dict[str, Any]] = None,
    dump_path: Optional[str] = None,
    score_ranges: Optional[Dict[str, List[float]]] = None,
) -> EvalReport:
    """
    Predict every utterance of a corpus and build its report.

    Parameters:
        model (HMambaModel): Trained model
        corpus (Corpus): Raw-scale labelled corpus
        providers (Sequence[FeatureProvider]): Feature blocks for the corpus
        seeds (List[int], optional): Seeds covered
        run_config (dict, optional): Reproducibility stamp
        dump_path (str, optional): Write per-utterance predictions here (JSONL)
        score_ranges (dict, optional): Ranges the model was trained with; defaults to the corpus ranges

    Returns:
        EvalReport: Metrics over the corpus
    """

    scaler = ScoreScaler(score_ranges or corpus.score_ranges)
    predictions = [predict(model, record, providers, scaler) for record in corpus]
    if dump_path:
        write_jsonl(dump_path, (p.to_dict() for p in predictions))
        logger.info("Wrote %d predictions to %s", len(predictions), dump_path)
    aspects = {
        "phone": model.config.phone_aspects,
        "word": model.config.word_aspects,
        "utterance": model.config.utterance_aspects,
    }
    report = build_report(predictions, corpus, aspects, seeds, run_config)
    report.check_invariants()
    return report


def curve_point(report: EvalReport) -> Dict[str, float]:
    """The quantities plotted per epoch: PER and the total-score correlations."""
    return {
        "per": report.mdd.get("per"),
        "f1": report.mdd.get("f1"),
        "phone_pcc": report.apa.get("phone.accuracy", {}).get("pcc"),
        "word_total_pcc": report.apa.get("word.total", {}).get("pcc"),
        "utterance_total_pcc": report.apa.get("utterance.total", {}).get("pcc"),
    }

"""Evaluation report: per-aspect APA metrics, MDD metrics and seed averaging."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config.constants import FORMAT_VERSION
from data.csv_generator import CSVGenerator
from metrics.mdd_metrics import harmonic_mean
from util.file_util import read_json, write_json
from util.log_util import get_logger
from util.validation import SchemaMismatchError, ValidationError

logger = get_logger("metrics.report")

APA_METRICS = ("pcc", "mse")
MDD_METRICS = ("precision", "recall", "f1", "per")


@dataclass
class EvalReport:
    """
    apa: "granularity.aspect" -> {"pcc", "mse"}
    mdd: {"precision", "recall", "f1", "per"}
    """

    apa: Dict[str, Dict[str, float]]
    mdd: Dict[str, float]
    seeds: List[int] = field(default_factory=list)
    n_utterances: int = 0
    run_config: Optional[Dict[str, Any]] = None
    flags: List[str] = field(default_factory=list)

    def schema(self):
        return (
            tuple(sorted((key, tuple(sorted(values))) for key, values in self.apa.items())),
            tuple(sorted(self.mdd)),
        )

    def check_invariants(self) -> None:
        """Raise ValidationError when a metric leaves its range (NaN is allowed)."""
        problems = []
        for key, values in self.apa.items():
            value = values.get("pcc")
            if value is not None and not math.isnan(value) and not -1.0 <= value <= 1.0:
                problems.append(f"{key} pcc {value} outside [-1, 1]")
        for name in ("precision", "recall", "f1"):
            value = self.mdd.get(name)
            if value is not None and not math.isnan(value) and not 0.0 <= value <= 1.0:
                problems.append(f"{name} {value} outside [0, 1]")
        value = self.mdd.get("per")
        if value is not None and not math.isnan(value) and value < 0:
            problems.append(f"per {value} is negative")
        if problems:
            raise ValidationError("invalid report: " + "; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "apa": {key: dict(values) for key, values in self.apa.items()},
            "mdd": dict(self.mdd),
            "seeds": list(self.seeds),
            "n_utterances": self.n_utterances,
            "run_config": self.run_config,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "EvalReport":
        if payload.get("format_version") != FORMAT_VERSION:
            raise SchemaMismatchError(
                f"report format version {payload.get('format_version')} != {FORMAT_VERSION}"
            )

        def number(value):
            return float("nan") if value is None else float(value)

        return cls(
            apa={k: {m: number(v) for m, v in values.items()} for k, values in payload["apa"].items()},
            mdd={k: number(v) for k, v in payload["mdd"].items()},
            seeds=list(payload.get("seeds", [])),
            n_utterances=int(payload.get("n_utterances", 0)),
            run_config=payload.get("run_config"),
            flags=list(payload.get("flags", [])),
        )

    def csv_headers(self) -> List[str]:
        headers = ["seeds", "n_utterances"]
        for key in sorted(self.apa):
            headers.extend(f"{key}.{metric}" for metric in sorted(self.apa[key]))
        headers.extend(f"mdd.{name}" for name in sorted(self.mdd))
        return headers

    def csv_row(self) -> Dict[str, Any]:
        """Flat row: one column per (aspect, metric) and per MDD metric."""
        row: Dict[str, Any] = {
            "seeds": ";".join(str(s) for s in self.seeds),
            "n_utterances": self.n_utterances,
        }
        for key, values in self.apa.items():
            for metric, value in values.items():
                row[f"{key}.{metric}"] = value
        for name, value in self.mdd.items():
            row[f"mdd.{name}"] = value
        return row

    def write(self, json_path: str, csv_path: Optional[str] = None) -> None:
        """Write the JSON report and, when `csv_path` is given, the one-row CSV."""
        write_json(json_path, self.to_dict())
        if csv_path:
            CSVGenerator(csv_path, self.csv_headers()).write([self.csv_row()])

    @classmethod
    def read(cls, path: str) -> "EvalReport":
        return cls.from_dict(read_json(path))


def aggregate_seeds(reports: List[EvalReport]) -> EvalReport:
    """
    Average reports from independent seeds.

    Every metric is the arithmetic mean over reports, except F1, which is
    the harmonic mean of the averaged precision and recall.

    Parameters:
        reports (List[EvalReport]): Reports sharing one schema

    Returns:
        EvalReport: Averaged report listing every seed
    """

    if not reports:
        raise SchemaMismatchError("no reports to aggregate")
    schema = reports[0].schema()
    for report in reports[1:]:
        if report.schema() != schema:
            raise SchemaMismatchError("reports have different aspect or metric sets")

    def average(values: List[float]) -> float:
        return float(np.mean(values))

    apa = {
        key: {metric: average([r.apa[key][metric] for r in reports]) for metric in values}
        for key, values in reports[0].apa.items()
    }
    mdd = {name: average([r.mdd[name] for r in reports]) for name in reports[0].mdd}
    if "precision" in mdd and "recall" in mdd and "f1" in mdd:
        mdd["f1"] = harmonic_mean(mdd["precision"], mdd["recall"])

    seeds: List[int] = []
    flags: List[str] = []
    for report in reports:
        seeds.extend(report.seeds)
        flags.extend(f for f in report.flags if f not in flags)
    if len(reports) > 1:
        logger.info("Aggregated %d reports (seeds %s)", len(reports), seeds)
    return EvalReport(apa, mdd, seeds, reports[0].n_utterances, reports[0].run_config, flags)

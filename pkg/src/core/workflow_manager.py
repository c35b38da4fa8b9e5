"""Main application workflow: one method per command."""

import copy
import os
from typing import Dict, List, Optional, Sequence, Tuple

from config.constants import (
    BEST_CHECKPOINT,
    FEATURE_FILE,
    FORMAT_VERSION,
    REPORT_CSV_TITLE,
    REPORT_FILE,
    SWEEP_CSV_HEADERS,
)
from config.run_config import RunConfig
from core.benchmark import benchmark
from core.evaluator import evaluate, predict
from core.score_card import format_score_card
from core.trainer import train
from data.corpus_manager import Corpus, UtteranceRecord, corpus_path, load_corpus, validate_record
from data.csv_generator import CSVGenerator
from data.score_scaler import ScoreScaler
from data.synthetic_generator import SyntheticConfig, generate_synthetic
from features.providers import FeatureStore
from metrics.eval_report import EvalReport, aggregate_seeds
from model.checkpoint import Checkpoint, load_checkpoint
from util.file_util import prepare_output_directory, read_json, read_jsonl, write_json
from util.log_util import get_logger
from util.validation import CheckpointError, CorpusValidationError, ValidationError, require_file
from viz.curve_generator import CurveGenerator, epoch_rows

logger = get_logger("core.workflow")


class WorkflowManager:
    """Runs the commands against one effective RunConfig."""

    def __init__(self, run_config: Optional[RunConfig] = None):
        self.run_config = run_config or RunConfig()

    def generate_data(
        self,
        out_dir: str,
        n_utts: int,
        n_test: int,
        error_rate: float,
        noise: float,
        seed: int,
        phones_per_utt: int = 12,
        force: bool = False,
    ) -> Dict[str, Corpus]:
        """Write a synthetic train/test corpus with features and a sample utterance."""
        config = SyntheticConfig(
            n_utts=n_utts,
            n_test=n_test,
            phones_per_utt=phones_per_utt,
            error_rate=error_rate,
            noise=noise,
            seed=seed,
        )
        config.validate()
        prepare_output_directory(out_dir, force)
        return generate_synthetic(config, out_dir)

    @staticmethod
    def has_split(data_dir: str, split: str) -> bool:
        return os.path.isfile(corpus_path(data_dir, split))

    @staticmethod
    def load_split(data_dir: str, split: str) -> Tuple[Corpus, FeatureStore]:
        """
        Load a split's corpus and the feature file its header names.

        Returns:
            tuple: (Corpus, FeatureStore)
        """

        path = corpus_path(data_dir, split)
        require_file(path)
        corpus = load_corpus(path)
        feature_file = os.path.join(data_dir, corpus.feature_file or FEATURE_FILE.format(split=split))
        store = FeatureStore.load(feature_file)
        missing = [r.utt_id for r in corpus if r.utt_id not in store.providers[0].blocks]
        if missing:
            raise ValidationError(f"{feature_file} lacks features for {len(missing)} utterance(s): {missing[:5]}")
        return corpus, store

    def train(
        self,
        data_dir: str,
        out_dir: str,
        seeds: Optional[Sequence[int]] = None,
        force: bool = False,
    ) -> EvalReport:
        """
        Train one model per seed and write the seed-averaged report.

        Each seed writes history and checkpoints to `out_dir/seed_{s}`; its best
        checkpoint is evaluated on the test split (the training split when no
        test split exists) and the reports are averaged into `out_dir/report.json`.

        Returns:
            EvalReport: The aggregate report
        """

        seeds = list(seeds) if seeds else list(self.run_config.train.seeds)
        self.run_config.validate()
        corpus, store = self.load_split(data_dir, "train")
        if self.has_split(data_dir, "test"):
            eval_corpus, eval_store = self.load_split(data_dir, "test")
            eval_flags = []
        else:
            logger.warning("No test split in %s; reporting metrics on the training split", data_dir)
            eval_corpus, eval_store = corpus, store
            eval_flags = ["evaluated_on_train_split"]
        prepare_output_directory(out_dir, force)

        reports = []
        for seed in seeds:
            seed_dir = os.path.join(out_dir, f"seed_{seed}")
            train(corpus, store, self.run_config, seed, seed_dir)
            reports.append(self._evaluate_checkpoint(os.path.join(seed_dir, BEST_CHECKPOINT), eval_corpus, eval_store))

        report = aggregate_seeds(reports)
        report.run_config = self.run_config.to_dict()
        report.flags = eval_flags + [f for f in report.flags if f not in eval_flags]
        report.write(os.path.join(out_dir, REPORT_FILE), os.path.join(out_dir, REPORT_CSV_TITLE))
        logger.info("Wrote %s", os.path.join(out_dir, REPORT_FILE))
        return report

    def _evaluate_checkpoint(
        self,
        model_path: str,
        corpus: Corpus,
        store: FeatureStore,
        dump_path: Optional[str] = None,
    ) -> EvalReport:
        checkpoint = load_checkpoint(model_path)
        check_features(checkpoint, store)
        return evaluate(
            checkpoint.model,
            corpus,
            store.providers,
            seeds=[checkpoint.seed] if checkpoint.seed is not None else [],
            run_config=checkpoint.run_config.to_dict(),
            dump_path=dump_path,
            score_ranges=checkpoint.score_ranges,
        )

    def evaluate(
        self,
        model_path: str,
        data_dir: str,
        out_path: str,
        split: str = "test",
        dump_path: Optional[str] = None,
    ) -> EvalReport:
        """Evaluate a checkpoint on a split; writes the JSON report and its one-row CSV."""
        corpus, store = self.load_split(data_dir, split)
        report = self._evaluate_checkpoint(model_path, corpus, store, dump_path)
        report.write(out_path, os.path.splitext(out_path)[0] + ".csv")
        logger.info("Wrote %s", out_path)
        return report

    def score(self, model_path: str, utt_path: str) -> str:
        """
        Score one utterance file ({record, features}) and return its score card.

        Raises:
            AlignmentError: Feature rows do not match the record's phones
        """

        payload = read_json(utt_path)
        if not isinstance(payload, dict) or "record" not in payload or "features" not in payload:
            raise ValidationError(f"{utt_path} must hold 'record' and 'features'")
        record = UtteranceRecord.from_dict(payload["record"])
        store = FeatureStore.from_rows([payload["features"]], utt_path)

        checkpoint = load_checkpoint(model_path)
        problems = validate_record(record, checkpoint.model.inventory, checkpoint.score_ranges)
        if problems:
            raise CorpusValidationError({record.utt_id: problems})
        check_features(checkpoint, store)
        prediction = predict(checkpoint.model, record, store.providers, ScoreScaler(checkpoint.score_ranges))
        return format_score_card(record, prediction)

    def sweep_alpha(
        self,
        data_dir: str,
        out_path: str,
        alphas: Sequence[float],
        seeds: Optional[Sequence[int]] = None,
        work_dir: Optional[str] = None,
        force: bool = False,
    ) -> List[Dict]:
        """
        Train one set of seeds per alpha and tabulate the MDD metrics.

        alpha = 0 gives the plain cross-entropy baseline. Models are trained in
        `work_dir` (default: `<out_path stem>_runs`).

        Returns:
            List[Dict]: One {alpha, precision, recall, f1, per} row per alpha, in the given order
        """

        if not alphas:
            raise ValidationError("at least one alpha is required")
        work_dir = work_dir or os.path.splitext(out_path)[0] + "_runs"
        prepare_output_directory(work_dir, force)
        base = self.run_config
        rows = []
        for alpha in alphas:
            config = copy.deepcopy(base)
            config.loss.alpha = float(alpha)
            config.validate()
            report = WorkflowManager(config).train(
                data_dir, os.path.join(work_dir, f"alpha_{alpha:g}"), seeds, force=True
            )
            rows.append({"alpha": float(alpha), **{k: report.mdd[k] for k in SWEEP_CSV_HEADERS[1:]}})
            logger.info("alpha=%g: %s", alpha, rows[-1])

        write_json(out_path, {
            "format_version": FORMAT_VERSION,
            "run_config": base.to_dict(),
            "seeds": list(seeds) if seeds else list(base.train.seeds),
            "rows": rows,
        })
        CSVGenerator(os.path.splitext(out_path)[0] + ".csv", SWEEP_CSV_HEADERS).write(rows)
        return rows

    def bench(self, seq_len: int, out_path: Optional[str] = None, repeats: int = 5) -> Dict:
        """Block- and model-level params/MACs for both block types, plus timing."""
        result = benchmark(self.run_config.model, seq_len, repeats)
        result["run_config"] = self.run_config.to_dict()
        if out_path:
            write_json(out_path, result)
        return result

    def plot_curves(self, history_paths: Sequence[str], out_path: str, labels: Optional[Sequence[str]] = None) -> str:
        """Render the training-curve page from one or more history files."""
        if labels and len(labels) != len(history_paths):
            raise ValidationError("give one label per history file")
        runs = {}
        for i, path in enumerate(history_paths):
            require_file(path)
            label = labels[i] if labels else os.path.basename(os.path.dirname(os.path.abspath(path))) or f"run_{i}"
            if label in runs:
                label = f"{label}_{i}"
            runs[label] = epoch_rows(read_jsonl(path))
        return CurveGenerator(runs).generate(out_path)


def check_features(checkpoint: Checkpoint, store: FeatureStore) -> None:
    """The store must supply every provider of the checkpoint's manifest at the trained width."""
    model = checkpoint.model
    dims = {p.name: p.dim for p in store.providers}
    missing = [name for name in model.manifest if name not in dims]
    if missing:
        raise CheckpointError(f"features lack provider(s) the model was trained with: {missing}")
    width = sum(dims[name] for name in model.manifest)
    if width != model.config.input_dim:
        raise CheckpointError(
            f"feature width {width} does not match the model input width {model.config.input_dim}"
        )
    if model.provider_dims is not None:
        changed = [
            f"{name}: {dims[name]} != {dim}"
            for name, dim in zip(model.manifest, model.provider_dims)
            if dims[name] != dim
        ]
        if changed:
            raise CheckpointError(f"provider widths differ from training: {changed}")

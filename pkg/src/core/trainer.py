"""Training loop: batching, joint objective, schedule, history and checkpoints."""

import copy
import math
import os
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.constants import BEST_CHECKPOINT, CURVES_CSV, CURVE_CSV_HEADERS, FINAL_CHECKPOINT, HISTORY_FILE
from config.run_config import RunConfig
from config.train_config import LossConfig
from core.evaluator import curve_point, evaluate
from core.optimizer import Adam, group_of
from core.scheduler import lr_at
from data.corpus_manager import Corpus, UtteranceRecord
from data.csv_generator import CSVGenerator
from data.score_scaler import ScoreScaler, normalize_scores
from features.assembly import assemble_features
from features.providers import FeatureStore
from losses.apa_loss import apa_loss
from losses.dexent import dexent_terms, estimate_frequencies, mdd_targets, total_loss
from model.checkpoint import save_checkpoint
from model.hmamba import MAIN_GROUP, UTT_HEAD_GROUP, HMambaModel, build_model
from model.word_ops import broadcast_word_targets
from numerics import ops
from numerics.tensor import DiffTensor
from util.file_util import append_jsonl, dumps_json, ensure_directory_exists, write_jsonl
from util.log_util import get_logger
from util.rng_util import named_rng, stable_bucket
from util.validation import ConfigError, FrequencyEstimateError, NumericError, TrainingDivergedError

logger = get_logger("core.trainer")


def split_train_dev(
    records: Sequence[UtteranceRecord], seed: int, buckets: int
) -> Tuple[List[UtteranceRecord], List[UtteranceRecord]]:
    """
    Seed-deterministic dev split: bucket 0 of `buckets` goes to dev.

    With buckets = 0, or when the split would leave no training utterance,
    everything is training data.
    """

    if buckets == 0:
        return list(records), []
    train, dev = [], []
    for record in records:
        (dev if stable_bucket(seed, record.utt_id, buckets) == 0 else train).append(record)
    if not train:
        logger.warning("Dev split would leave no training utterances; training on all %d", len(dev))
        return dev, []
    return train, dev


def resolve_frequencies(loss: LossConfig, records: Sequence[UtteranceRecord]) -> LossConfig:
    """
    Fill mu_m / mu_h from the training split unless both are configured.

    deXent is switched off, with a warning, when no mispronunciation exists.
    """

    if not loss.dexent_enabled or (loss.mu_m and loss.mu_h):
        return loss
    try:
        mu_m, mu_h = estimate_frequencies(records)
    except FrequencyEstimateError as e:
        logger.warning("deXent disabled, plain cross-entropy used: %s", e)
        return replace(loss, dexent_enabled=False)
    logger.info("Estimated mu_m=%.4f mu_h=%.4f (weight %.4f)", mu_m, mu_h, (mu_h / mu_m) ** loss.alpha)
    return replace(loss, mu_m=mu_m, mu_h=mu_h)


def apa_targets(record: UtteranceRecord, utterance_aspects: Sequence[str]) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """(targets, mask) per granularity for one normalized record; missing labels are masked."""
    phone = np.array([np.nan if s is None else s for s in record.phone_scores], dtype=np.float64)
    word, word_mask = broadcast_word_targets(record)
    utterance = np.array(
        [np.nan if record.utterance_scores.get(a) is None else record.utterance_scores[a] for a in utterance_aspects],
        dtype=np.float64,
    ).reshape(1, -1)
    return {
        "phone": (phone, ~np.isnan(phone)),
        "word": (word, word_mask),
        "utterance": (utterance, ~np.isnan(utterance)),
    }


class Trainer:
    """
    Trains one model for one seed.

    Records are normalized to [0, 1] once; dev metrics are computed on the
    raw scale. History rows are appended to `out_dir/history.jsonl`.
    """

    def __init__(
        self,
        run_config: RunConfig,
        corpus: Corpus,
        store: FeatureStore,
        seed: int,
        out_dir: str,
        model: Optional[HMambaModel] = None,
    ):
        self.run_config = copy.deepcopy(run_config)
        self.run_config.validate()
        self.seed = int(seed)
        self.out_dir = out_dir
        self.corpus = corpus
        self.providers = store.select(self.run_config.features_exclude)
        self.manifest = [p.name for p in self.providers]

        self.scaler = ScoreScaler(corpus.score_ranges)
        self.scaler.check_covers()
        train, dev = split_train_dev(corpus.records, self.seed, self.run_config.train.dev_fraction_buckets)
        if not train:
            raise ConfigError("no training utterances")
        self.train_records = [normalize_scores(r, self.scaler) for r in train]
        self.dev_records = [normalize_scores(r, self.scaler) for r in dev]
        self.dev_corpus = corpus.subset(dev) if dev else None
        logger.info("Seed %d: %d training / %d dev utterances", self.seed, len(train), len(dev))

        self.run_config.loss = resolve_frequencies(self.run_config.loss, train)
        self.loss_config = self.run_config.loss

        width = int(np.sum([p.dim for p in self.providers]))
        self.model = model or build_model(
            self.run_config.model, corpus.inventory, self.manifest, width, self.seed,
            provider_dims=[p.dim for p in self.providers],
        )
        groups = self.model.parameter_groups()
        owner = group_of(groups)
        names = [name for name, _ in self.model.named_parameters()]
        if len(owner) != len(names) or set(owner) != set(names):
            raise ConfigError("parameter groups do not partition the trainable parameters")
        train_cfg = self.run_config.train
        self.optimizer = Adam(self.model, groups, train_cfg.adam_betas, train_cfg.adam_eps)
        self.peaks = {MAIN_GROUP: train_cfg.lr_main, UTT_HEAD_GROUP: train_cfg.lr_utt_head}

        self.data_rng = named_rng(self.seed, "data")
        self.dropout_rng = named_rng(self.seed, "dropout")
        self.step = 0
        self.history: List[Dict] = []

    @property
    def steps_per_epoch(self) -> int:
        return math.ceil(len(self.train_records) / self.run_config.train.batch_size)

    @property
    def total_steps(self) -> int:
        total = self.run_config.train.epochs * self.steps_per_epoch
        cap = self.run_config.train.max_steps
        return min(total, cap) if cap else total

    def objective(self, records: Sequence[UtteranceRecord], training: bool) -> Tuple[DiffTensor, Dict[str, float]]:
        """
        Joint loss of a batch: per-utterance predictions are concatenated and
        scored as one set of positions.

        Parameters:
            records (Sequence[UtteranceRecord]): Normalized records
            training (bool): Apply SSL-feature dropout

        Returns:
            tuple: (scalar loss, float components for the history)
        """

        config = self.model.config
        preds = {"phone": [], "word": [], "utterance": []}
        targets = {"phone": [], "word": [], "utterance": []}
        masks = {"phone": [], "word": [], "utterance": []}
        logits, realized, canonical, mdd_mask = [], [], [], []
        for record in records:
            bundle = assemble_features(
                record, self.providers, training, self.dropout_rng, self.manifest, config.ssl_dropout
            )
            out = self.model(record, bundle, training=training)
            preds["phone"].append(out.phone_scores)
            preds["word"].append(out.word_scores)
            preds["utterance"].append(ops.reshape(out.utterance_scores, (1, len(config.utterance_aspects))))
            for granularity, (target, mask) in apa_targets(record, config.utterance_aspects).items():
                targets[granularity].append(target)
                masks[granularity].append(mask)
            r, c, m = mdd_targets(record, self.model.inventory)
            logits.append(out.mdd_logits)
            realized.append(r)
            canonical.append(c)
            mdd_mask.append(m)

        apa = apa_loss(
            {g: ops.concat(p, axis=0) for g, p in preds.items()},
            {g: np.concatenate(t, axis=0) for g, t in targets.items()},
            {g: np.concatenate(m, axis=0) for g, m in masks.items()},
            self.loss_config.omega,
        )
        terms = dexent_terms(
            ops.concat(logits, axis=0),
            np.concatenate(realized),
            np.concatenate(canonical),
            np.concatenate(mdd_mask),
            self.loss_config.mis_weight,
        )
        n_scored = max(terms.n_hit + terms.n_mis, 1)
        mdd = ops.scale(terms.total, 1.0 / n_scored)
        total = total_loss(apa, mdd, self.loss_config.beta)
        components = {
            "apa": apa.item(),
            "mdd_hit": terms.hit.item() / n_scored,
            "mdd_mis": terms.mis.item() / n_scored,
            "weight": terms.weight,
            "mdd": mdd.item(),
            "total": total.item(),
        }
        return total, components

    def train_step(self, batch: Sequence[UtteranceRecord], epoch: int) -> Dict:
        """Forward, backward and one Adam update; returns the history row."""
        total, components = self.objective(batch, training=True)
        step = self.step + 1
        if not np.isfinite(components["total"]):
            raise TrainingDivergedError(f"total loss is {components['total']} at step {step}")
        total.backward()

        # midpoint of the step interval keeps the first and last updates above 0
        rates = {
            group: lr_at(
                step - 0.5,
                self.total_steps,
                peak,
                self.run_config.train.warmup_frac,
                self.run_config.train.hold_frac,
            )
            for group, peak in self.peaks.items()
        }
        try:
            self.optimizer.step(rates)
        except NumericError as e:
            raise TrainingDivergedError(f"step {step}: {e}") from e
        self.step = step

        row = {"kind": "step", "step": step, "epoch": epoch, "lr": rates[MAIN_GROUP], **components}
        logger.debug(dumps_json(row))
        return row

    def dev_loss(self) -> Optional[float]:
        if not self.dev_records:
            return None
        bs = self.run_config.train.batch_size
        weighted = 0.0
        for start in range(0, len(self.dev_records), bs):
            batch = self.dev_records[start:start + bs]
            _, components = self.objective(batch, training=False)
            weighted += components["total"] * len(batch)
        return weighted / len(self.dev_records)

    def end_epoch(self, epoch: int, train_losses: List[float], lr: float) -> Dict:
        """Dev evaluation, epoch history row, checkpoints and the curve row."""
        row = {
            "kind": "epoch",
            "epoch": epoch,
            "step": self.step,
            "lr": lr,
            "train_loss": float(np.mean(train_losses)) if train_losses else None,
            "dev_loss": self.dev_loss(),
        }
        if self.dev_corpus is not None:
            report = evaluate(self.model, self.dev_corpus, self.providers)
            row.update(curve_point(report))
        return row

    def save(self, name: str, epoch: int, extra: Dict) -> None:
        save_checkpoint(
            os.path.join(self.out_dir, name),
            self.model,
            self.run_config,
            self.scaler.to_dict(),
            step=self.step,
            epoch=epoch,
            seed=self.seed,
            rng=self.data_rng,
            extra=extra,
        )

    def record(self, row: Dict) -> None:
        self.history.append(row)
        append_jsonl(self.history_path, row)

    @property
    def history_path(self) -> str:
        return os.path.join(self.out_dir, HISTORY_FILE)

    def run(self) -> List[Dict]:
        """
        Train for the configured epochs (or until max_steps).

        Returns:
            List[Dict]: History rows, step and epoch kinds interleaved

        Raises:
            TrainingDivergedError: Non-finite loss or gradient; checkpoints of
            the last completed epoch stay on disk
        """

        ensure_directory_exists(self.out_dir)
        write_jsonl(self.history_path, [])
        train_cfg = self.run_config.train
        curves = None
        if train_cfg.write_curves:
            curves = CSVGenerator(os.path.join(self.out_dir, CURVES_CSV), CURVE_CSV_HEADERS)
            curves.create_csv()

        best = math.inf
        total_steps = self.total_steps
        logger.info("Seed %d: %d steps over up to %d epochs", self.seed, total_steps, train_cfg.epochs)
        for epoch in range(1, train_cfg.epochs + 1):
            order = self.data_rng.permutation(len(self.train_records))
            losses: List[float] = []
            lr = 0.0
            for start in range(0, len(order), train_cfg.batch_size):
                if self.step >= total_steps:
                    break
                batch = [self.train_records[i] for i in order[start:start + train_cfg.batch_size]]
                try:
                    row = self.train_step(batch, epoch)
                except TrainingDivergedError as e:
                    logger.error("Seed %d diverged: %s", self.seed, e)
                    self.record({"kind": "diverged", "step": self.step + 1, "epoch": epoch, "reason": str(e)})
                    raise
                self.record(row)
                losses.append(row["total"])
                lr = row["lr"]
            if not losses:
                break

            row = self.end_epoch(epoch, losses, lr)
            self.record(row)
            selection = row["dev_loss"] if row["dev_loss"] is not None else row["train_loss"]
            extra = {"train_loss": row["train_loss"], "dev_loss": row["dev_loss"]}
            self.save(FINAL_CHECKPOINT, epoch, extra)
            if selection is not None and selection < best:
                best = selection
                self.save(BEST_CHECKPOINT, epoch, extra)
                logger.info("Epoch %d: new best (%.6f)", epoch, selection)
            if curves is not None:
                curves.add_rows([{"run": f"seed_{self.seed}", **row}])
            logger.info(
                "Seed %d epoch %d: train %.6f, dev %s",
                self.seed,
                epoch,
                row["train_loss"],
                "n/a" if row["dev_loss"] is None else f"{row['dev_loss']:.6f}",
            )
            if self.step >= total_steps:
                break
        return self.history


def train(
    corpus: Corpus,
    store: FeatureStore,
    run_config: RunConfig,
    seed: int,
    out_dir: str,
    model: Optional[HMambaModel] = None,
) -> Tuple[HMambaModel, List[Dict]]:
    """
    Train one seed and return the final model with its history.

    Parameters:
        corpus (Corpus): Training corpus (raw scores); a dev split is derived from the seed
        store (FeatureStore): Features of the corpus
        run_config (RunConfig): Effective configuration
        seed (int): Seed of every random stream
        out_dir (str): Directory for history and checkpoints

    Returns:
        tuple: (trained model, history rows)
    """

    trainer = Trainer(run_config, corpus, store, seed, out_dir, model)
    history = trainer.run()
    return trainer.model, history

"""The hierarchical model: phone, word and utterance stacks with their heads."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from blocks import Linear, Module, Sequential, build_block
from blocks.layers import uniform_init
from config.model_config import HMambaConfig
from data.corpus_manager import UtteranceRecord
from data.phone_inventory import PhoneInventory
from features.assembly import FeatureBundle, project
from features.embeddings import PhonologicalEmbeddings, phone_level_input
from model.heads import AspectHeads, ClassifierHead, RegressorHead
from model.mdd import diagnose
from model.pooling import attention_pool
from numerics import ops
from numerics.nn_ops import conv1d
from numerics.tensor import DiffTensor
from util.validation import AlignmentError, ConfigError, DimensionError

UTT_HEAD_GROUP = "utt_head"
MAIN_GROUP = "main"


@dataclass
class ModelOutput:
    phone_scores: DiffTensor
    word_scores: DiffTensor
    utterance_scores: DiffTensor
    mdd_logits: DiffTensor
    pooling_weights: DiffTensor
    diagnosis: np.ndarray
    error_states: np.ndarray


class HMambaModel(Module):
    """
    Phone stack -> phone regressor and MDD classifier.
    Word stack -> conv, SiLU, projection -> three word regressors.
    Utterance stack -> score-conditioned attention pooling -> five regressors.
    """

    def __init__(
        self,
        config: HMambaConfig,
        inventory: PhoneInventory,
        manifest: List[str],
        input_dim: int,
        rng: np.random.Generator,
        provider_dims: Optional[Sequence[int]] = None,
    ):
        super().__init__()
        config.input_dim = input_dim
        config.n_classes = inventory.n_classes
        config.n_canonical = inventory.n_canonical
        config.validate()
        self.config = config
        self.inventory = inventory
        self.manifest = list(manifest)
        self.provider_dims = list(provider_dims) if provider_dims is not None else None
        if self.provider_dims is not None and (
                len(self.provider_dims) != len(self.manifest) or sum(self.provider_dims) != input_dim):
            raise DimensionError(
                f"provider widths {self.provider_dims} do not match manifest {self.manifest} "
                f"and input width {input_dim}"
            )
        d = config.d

        self.add_module("input_proj", Linear(input_dim, d, rng))
        self.add_module("embeddings", PhonologicalEmbeddings(config, inventory.n_canonical, rng))

        self.add_module("phone_blocks", Sequential(build_block(config, rng) for _ in range(config.n_phone_blocks)))
        self.add_module("phone_head", RegressorHead(d, config.head_hidden, rng))
        self.add_module("mdd_head", ClassifierHead(d, config.head_hidden, inventory.n_classes, rng))

        self.add_module("word_blocks", Sequential(build_block(config, rng) for _ in range(config.n_word_blocks)))
        fan_in = d * config.word_conv_kernel
        self.add_parameter(
            "word_conv_weight",
            uniform_init(rng, fan_in, (config.word_conv_channels, d, config.word_conv_kernel)),
        )
        self.add_parameter("word_conv_bias", uniform_init(rng, fan_in, (config.word_conv_channels,)))
        self.add_module("word_proj", Linear(config.word_conv_channels, d, rng))
        self.add_module("word_heads", AspectHeads(config.word_aspects, d, config.head_hidden, rng))

        self.add_module("utt_blocks", Sequential(build_block(config, rng) for _ in range(config.n_utt_blocks)))
        self.add_parameter("pool_w", np.zeros(1 + len(config.word_aspects)))
        self.add_module("utt_heads", AspectHeads(config.utterance_aspects, d, config.head_hidden, rng))

    def parameter_groups(self) -> Dict[str, List[str]]:
        """Disjoint learning-rate groups covering every parameter."""
        groups = {MAIN_GROUP: [], UTT_HEAD_GROUP: []}
        for name, _ in self.named_parameters():
            groups[UTT_HEAD_GROUP if name.startswith("utt_heads.") else MAIN_GROUP].append(name)
        return groups

    def phone_stack(self, record: UtteranceRecord, bundle: FeatureBundle) -> DiffTensor:
        """H_phn from the feature bundle (projection, embeddings, phone blocks)."""
        if bundle.n_rows != len(record):
            raise AlignmentError(
                f"{record.utt_id}: bundle has {bundle.n_rows} rows for {len(record)} phones"
            )
        x = project(bundle, self.input_proj.weight, self.input_proj.bias)
        H0 = phone_level_input(
            x, record, self.embeddings, self.inventory, self.config.long_sil_threshold
        )
        return self.phone_blocks(H0)

    def word_stack(self, H_phn: DiffTensor) -> DiffTensor:
        H = self.word_blocks(H_phn)
        H = ops.silu(conv1d(H, self.word_conv_weight, mode="same", bias=self.word_conv_bias))
        return self.word_proj(H)

    def __call__(
        self, record: UtteranceRecord, bundle: FeatureBundle, training: bool = False
    ) -> ModelOutput:
        return forward(record, bundle, self, training)

    def macs(self, seq_len: int) -> int:
        c = self.config
        per_position = (
            self.input_proj.macs(seq_len)
            + self.phone_blocks.macs(seq_len)
            + self.phone_head.macs(seq_len)
            + self.mdd_head.macs(seq_len)
            + self.word_blocks.macs(seq_len)
            + seq_len * c.word_conv_channels * c.d * c.word_conv_kernel
            + self.word_proj.macs(seq_len)
            + self.word_heads.macs(seq_len)
            + self.utt_blocks.macs(seq_len)
        )
        # pooling logits q.w plus the weighted sum of rows
        pooling = seq_len * self.pool_w.size + seq_len * c.d
        return int(per_position + pooling + self.utt_heads.macs(1))


def forward(
    record: UtteranceRecord,
    bundle: FeatureBundle,
    model: HMambaModel,
    training: bool = False,
) -> ModelOutput:
    """
    Run the whole hierarchy on one utterance.

    SSL dropout runs in feature assembly; the bundle must have been built in
    the same mode.

    Parameters:
        record (UtteranceRecord): Canonical phones, words, silences
        bundle (FeatureBundle): Aligned features (N rows)
        model (HMambaModel): Parameters
        training (bool): Training mode; must match the bundle

    Returns:
        ModelOutput: Scores at every granularity, MDD logits and the diagnosis
    """

    if bundle.training != training:
        raise ConfigError(
            f"{record.utt_id}: bundle was assembled with training={bundle.training}, "
            f"forward called with training={training}"
        )
    n = len(record)
    H_phn = model.phone_stack(record, bundle)
    phone_scores = model.phone_head(H_phn)
    mdd_logits = model.mdd_head(H_phn)

    H_wrd = model.word_stack(H_phn)
    word_scores = model.word_heads(H_wrd)

    H_utt = model.utt_blocks(H_wrd)
    q = ops.concat([ops.reshape(phone_scores, (n, 1)), word_scores], axis=1)
    pooled, alpha = attention_pool(H_utt, q, model.pool_w, model.config.tau)
    utterance_scores = model.utt_heads(pooled)

    diagnosis, error_states = diagnose(mdd_logits, record, model.inventory)
    if phone_scores.shape != (n,) or word_scores.shape != (n, len(model.config.word_aspects)):
        raise DimensionError(f"{record.utt_id}: unexpected head output shapes")
    return ModelOutput(
        phone_scores=phone_scores,
        word_scores=word_scores,
        utterance_scores=utterance_scores,
        mdd_logits=mdd_logits,
        pooling_weights=alpha,
        diagnosis=diagnosis,
        error_states=error_states,
    )


def build_model(
    config: HMambaConfig,
    inventory: PhoneInventory,
    manifest: List[str],
    input_dim: int,
    seed: int,
    rng: Optional[np.random.Generator] = None,
    provider_dims: Optional[Sequence[int]] = None,
) -> HMambaModel:
    """Model initialized from the `init` stream of `seed`."""
    from util.rng_util import named_rng

    return HMambaModel(
        config, inventory, manifest, input_dim, rng or named_rng(seed, "init"), provider_dims
    )

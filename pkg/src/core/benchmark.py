"""Parameter, MAC and timing comparison of the Mamba and Transformer variants."""

import time
from dataclasses import replace
from typing import Any, Dict

import numpy as np

from blocks import MambaBlock, TransformerBlock, count_params_and_macs
from config.constants import FEATURE_PROVIDERS, FORMAT_VERSION
from config.model_config import BLOCK_TYPES, HMambaConfig
from data.phone_inventory import PhoneInventory
from model.hmamba import HMambaModel
from numerics.tensor import DiffTensor
from util.log_util import get_logger
from util.rng_util import named_rng

logger = get_logger("core.benchmark")

BLOCK_CLASSES = {"mamba": MambaBlock, "transformer": TransformerBlock}


def time_forward(block, seq_len: int, d: int, repeats: int, rng: np.random.Generator) -> Dict[str, float]:
    """Median and minimum wall time of `repeats` forward passes on a random [T x d] input."""
    H = DiffTensor(rng.normal(0.0, 1.0, (seq_len, d)))
    block(H)
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        block(H)
        samples.append(time.perf_counter() - start)
    return {"median_s": float(np.median(samples)), "min_s": float(np.min(samples))}


def benchmark(config: HMambaConfig, seq_len: int, repeats: int = 5, seed: int = 0) -> Dict[str, Any]:
    """
    Compare both block types at the configured width.

    Parameters:
        config (HMambaConfig): Width and block internals
        seq_len (int): Sequence length T for MAC counts and timing
        repeats (int): Timed forward passes per block
        seed (int): Seed of the init stream

    Returns:
        dict: {"blocks": {type: {params, macs}}, "models": {...},
        "ratios": {...}, "timing": {type: {...}}}; only "timing" depends on the clock
    """

    inventory = PhoneInventory()
    input_dim = sum(dim for _, dim, _ in FEATURE_PROVIDERS)
    manifest = [name for name, _, _ in FEATURE_PROVIDERS]
    blocks, models, timing = {}, {}, {}
    for block_type in BLOCK_TYPES:
        variant = replace(config, block_type=block_type)
        variant.validate()
        block = BLOCK_CLASSES[block_type](variant, named_rng(seed, "init"))
        blocks[block_type] = count_params_and_macs(block, seq_len)
        model = HMambaModel(variant, inventory, manifest, input_dim, named_rng(seed, "init"))
        models[block_type] = count_params_and_macs(model, seq_len)
        timing[block_type] = time_forward(block, seq_len, config.d, repeats, named_rng(seed, "data"))
        logger.info(
            "%s block: %d params, %d MACs at T=%d (%.4fs median)",
            block_type,
            blocks[block_type]["params"],
            blocks[block_type]["macs"],
            seq_len,
            timing[block_type]["median_s"],
        )

    return {
        "format_version": FORMAT_VERSION,
        "d": config.d,
        "seq_len": seq_len,
        "blocks": blocks,
        "models": models,
        "ratios": {
            "block_params": blocks["mamba"]["params"] / blocks["transformer"]["params"],
            "block_macs": blocks["mamba"]["macs"] / blocks["transformer"]["macs"],
            "model_params": models["mamba"]["params"] / models["transformer"]["params"],
        },
        "timing": timing,
    }

"""Checkpoint files: lz4-compressed JSON holding config, parameters and training state."""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from config.constants import CHECKPOINT_EXTENSIONS, FORMAT_VERSION
from config.model_config import HMambaConfig
from config.run_config import RunConfig
from data.phone_inventory import PhoneInventory
from model.hmamba import HMambaModel
from util.file_util import read_compressed_json, write_compressed_json
from util.log_util import get_logger
from util.validation import CheckpointError, DimensionError, ValidationError, require_file

logger = get_logger("model.checkpoint")

CHECKPOINT_FORMAT = "hmamba-checkpoint"


@dataclass
class Checkpoint:
    """A restored model with the state it was saved with."""

    model: HMambaModel
    run_config: RunConfig
    score_ranges: Dict[str, List[float]]
    step: int = 0
    epoch: int = 0
    seed: Optional[int] = None
    rng_state: Optional[Dict[str, Any]] = None
    extra: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(
    path: str,
    model: HMambaModel,
    run_config: RunConfig,
    score_ranges: Dict[str, List[float]],
    step: int = 0,
    epoch: int = 0,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> None:
    """
    Write a checkpoint.

    Parameters:
        path (str): Destination (.ckpt)
        model (HMambaModel): Parameters to store
        run_config (RunConfig): Effective configuration
        score_ranges (dict): Raw score ranges used for denormalization
        step (int): Optimizer steps taken
        epoch (int): Completed epochs
        seed (int, optional): Run seed
        rng (np.random.Generator, optional): Stream whose state is stored
        extra (dict, optional): Additional JSON fields (e.g. dev loss)
    """

    payload = {
        "format": CHECKPOINT_FORMAT,
        "format_version": FORMAT_VERSION,
        "run_config": run_config.to_dict(),
        "model_config": model.config.to_dict(),
        "inventory": model.inventory.to_dict(),
        "manifest": list(model.manifest),
        "provider_dims": model.provider_dims,
        "score_ranges": score_ranges,
        "step": int(step),
        "epoch": int(epoch),
        "seed": seed,
        "rng_state": rng.bit_generator.state if rng is not None else None,
        "params": {
            name: {"shape": list(values.shape), "values": values.reshape(-1).tolist()}
            for name, values in model.state_dict().items()
        },
        "extra": extra or {},
    }
    write_compressed_json(path, payload)
    logger.debug("Saved checkpoint %s (step %d)", path, step)


def load_checkpoint(path: str) -> Checkpoint:
    """
    Rebuild the model stored in a checkpoint.

    Parameters:
        path (str): Checkpoint file

    Returns:
        Checkpoint: Model, configuration and training state

    Raises:
        CheckpointError: Unreadable file, wrong format, or parameters that do
        not match the stored configuration
    """

    try:
        require_file(path, CHECKPOINT_EXTENSIONS)
        payload = read_compressed_json(path)
    except ValidationError as e:
        raise CheckpointError(str(e)) from e
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not an {CHECKPOINT_FORMAT} file")
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {payload.get('format_version')} is not supported "
            f"(expected {FORMAT_VERSION})"
        )

    try:
        run_config = RunConfig.from_dict(payload["run_config"])
        run_config.model = HMambaConfig.from_dict(payload["model_config"])
        inventory = PhoneInventory.from_dict(payload["inventory"])
        params = payload["params"]
        state = {}
        for name, entry in params.items():
            values = np.asarray(entry["values"], dtype=np.float64)
            shape = tuple(entry["shape"])
            if values.size != int(np.prod(shape, dtype=np.int64)):
                raise CheckpointError(f"{path}: {name} holds {values.size} values for shape {shape}")
            state[name] = values.reshape(shape)
        config = run_config.model
        model = HMambaModel(
            config, inventory, payload["manifest"], config.input_dim, np.random.default_rng(0),
            payload.get("provider_dims"),
        )
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"{path}: missing or malformed field ({e})") from e
    except DimensionError as e:
        raise CheckpointError(f"{path}: {e}") from e

    model.load_state_dict(state)
    logger.info("Loaded checkpoint %s (%d parameters)", os.path.basename(path), model.num_parameters())
    return Checkpoint(
        model=model,
        run_config=run_config,
        score_ranges={k: list(v) for k, v in payload["score_ranges"].items()},
        step=int(payload.get("step", 0)),
        epoch=int(payload.get("epoch", 0)),
        seed=payload.get("seed"),
        rng_state=payload.get("rng_state"),
        extra=dict(payload.get("extra") or {}),
    )


def restore_rng(state: Optional[Dict[str, Any]]) -> Optional[np.random.Generator]:
    """Generator positioned where the saved stream stopped."""
    if not state:
        return None
    rng = np.random.default_rng()
    rng.bit_generator.state = state
    return rng

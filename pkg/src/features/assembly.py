"""Concatenate provider blocks into a per-phone matrix and project it to width d."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.constants import SSL_DROPOUT_RATE
from data.corpus_manager import UtteranceRecord
from features.providers import FeatureProvider, default_manifest
from numerics import ops
from numerics.nn_ops import dropout
from numerics.tensor import DiffTensor
from util.validation import AlignmentError, DimensionError


@dataclass(frozen=True)
class BlockLayout:
    name: str
    dim: int
    is_ssl: bool
    start: int
    stop: int


@dataclass
class FeatureBundle:
    """[N x sum(dims)] features of one utterance plus the column layout."""

    utt_id: str
    matrix: DiffTensor
    layout: Tuple[BlockLayout, ...]
    # mode the SSL dropout ran in
    training: bool = False

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def width(self) -> int:
        return self.matrix.shape[1]

    def columns_of(self, name: str) -> np.ndarray:
        for block in self.layout:
            if block.name == name:
                return self.matrix.values[:, block.start:block.stop]
        raise KeyError(name)


def assemble_features(
    record: UtteranceRecord,
    providers: Sequence[FeatureProvider],
    training: bool,
    rng: Optional[np.random.Generator],
    manifest: Optional[List[str]] = None,
    ssl_dropout: float = SSL_DROPOUT_RATE,
) -> FeatureBundle:
    """
    Build the feature bundle of one utterance.

    Parameters:
        record (UtteranceRecord): Utterance the rows must align with
        providers (Sequence[FeatureProvider]): Available providers, any order
        training (bool): Apply dropout to SSL blocks
        rng (np.random.Generator): Dropout stream, unused in eval mode
        manifest (List[str], optional): Provider order; defaults to the declared order
        ssl_dropout (float): Dropout rate of SSL blocks

    Returns:
        FeatureBundle: Blocks concatenated in manifest order
    """

    by_name = {p.name: p for p in providers}
    manifest = list(manifest) if manifest is not None else default_manifest(by_name)
    missing = [name for name in manifest if name not in by_name]
    if missing:
        raise AlignmentError(f"manifest names providers that are not available: {missing}")

    n_rows = len(record)
    blocks, layout, start = [], [], 0
    for name in manifest:
        provider = by_name[name]
        block = DiffTensor(provider.block(record.utt_id, n_rows))
        if provider.is_ssl:
            block = dropout(block, ssl_dropout, training, rng)
        blocks.append(block)
        layout.append(BlockLayout(name, provider.dim, provider.is_ssl, start, start + provider.dim))
        start += provider.dim

    return FeatureBundle(record.utt_id, ops.concat(blocks, axis=1), tuple(layout), training)


def project(bundle: FeatureBundle, W: DiffTensor, b: DiffTensor) -> DiffTensor:
    """
    Row-wise affine map A @ W + b.

    Parameters:
        bundle (FeatureBundle): [N x width] features
        W (DiffTensor): [width x d]
        b (DiffTensor): [d]

    Returns:
        DiffTensor: [N x d]
    """

    if W.ndim != 2 or W.shape[0] != bundle.width or b.shape != (W.shape[1],):
        raise DimensionError(
            f"projection W {W.shape} / b {b.shape} does not fit a bundle of width {bundle.width}"
        )
    return ops.add(ops.matmul(bundle.matrix, W), b)

"""
Training objectives.

This package contains the assessment and
diagnosis losses.
- apa_loss
- estimate_frequencies, dexent_loss
- total_loss
"""

from .apa_loss import apa_loss, combine, granularity_loss, granularity_losses
from .dexent import (
    DexentTerms,
    dexent_loss,
    dexent_terms,
    estimate_frequencies,
    mdd_targets,
    negative_log_likelihood,
    total_loss,
)

__all__ = [
    "apa_loss",
    "combine",
    "granularity_loss",
    "granularity_losses",
    "DexentTerms",
    "dexent_loss",
    "dexent_terms",
    "estimate_frequencies",
    "mdd_targets",
    "negative_log_likelihood",
    "total_loss",
]

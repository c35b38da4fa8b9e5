"""
Data operations and handling modules.

This package contains the corpus schema,
score scaling, the synthetic generator and CSV output.
- PhoneInventory
- UtteranceRecord, Corpus, load_corpus, save_corpus
- ScoreScaler
- SyntheticGenerator, generate_synthetic
- CSVGenerator
"""

from .csv_generator import CSVGenerator
from .phone_inventory import PhoneInventory
from .corpus_manager import Corpus, UtteranceRecord, load_corpus, save_corpus
from .score_scaler import ScoreScaler, denormalize_scores, normalize_scores
from .synthetic_generator import SyntheticConfig, SyntheticGenerator, generate_synthetic

__all__ = [
    "CSVGenerator",
    "PhoneInventory",
    "Corpus",
    "UtteranceRecord",
    "load_corpus",
    "save_corpus",
    "ScoreScaler",
    "normalize_scores",
    "denormalize_scores",
    "SyntheticConfig",
    "SyntheticGenerator",
    "generate_synthetic",
]

"""
Acoustic feature assembly and phonological embeddings.

This package contains the modules that turn
per-phone feature files into the phone-level input.
- FeatureProvider, FeatureStore
- FeatureBundle, assemble_features, project
- PhonologicalEmbeddings, relative_tokens, phone_level_input
"""

from .providers import FeatureProvider, FeatureStore, default_manifest, feature_line, save_features
from .assembly import BlockLayout, FeatureBundle, assemble_features, project
from .embeddings import PhonologicalEmbeddings, phone_level_input, relative_tokens

__all__ = [
    "FeatureProvider",
    "FeatureStore",
    "default_manifest",
    "feature_line",
    "save_features",
    "BlockLayout",
    "FeatureBundle",
    "assemble_features",
    "project",
    "PhonologicalEmbeddings",
    "phone_level_input",
    "relative_tokens",
]

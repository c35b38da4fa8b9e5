"""
Utility modules for hmamba-capt

This package contains various utility functions for:
- File and path operations (JSON, JSONL, lz4 blobs)
- Validation and the error hierarchy
- Logging setup
- Named random streams
"""

from .file_util import *
from .validation import *
from .rng_util import *


__all__ = [
    "ensure_directory_exists",
    "prepare_output_directory",
    "dumps_json",
    "write_json",
    "read_json",
    "write_jsonl",
    "append_jsonl",
    "iter_jsonl",
    "read_jsonl",
    "write_compressed_json",
    "read_compressed_json",
    "validate_file_exists",
    "validate_file_extension",
    "require_file",
    "ToolkitError",
    "ValidationError",
    "named_rng",
    "stable_bucket",
]

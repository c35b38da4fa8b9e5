"""File utility functions."""

import json
import math
import os
from typing import Any, Dict, Iterable, Iterator, List

import lz4.frame

from util.validation import OutputExistsError, ValidationError


def ensure_directory_exists(directory: str) -> None:
    """
    Ensure that a directory exists, creating it if necessary.

    Parameters:
      directory (str): The directory path to ensure exists
    """

    if directory and not os.path.exists(directory):
        os.makedirs(directory)


def prepare_output_directory(directory: str, force: bool = False) -> None:
    """
    Create an output directory, refusing to reuse a non-empty one unless forced.

    Parameters:
      directory (str): Output directory
      force (bool): Allow writing into a non-empty directory
    """

    if os.path.isdir(directory) and os.listdir(directory) and not force:
        raise OutputExistsError(
            f"Output directory is not empty: {directory} (use --force to overwrite)"
        )
    ensure_directory_exists(directory)


def _finite_or_none(value: Any) -> Any:
    """Replace NaN/inf floats with None so JSON output stays standard."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite_or_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_none(v) for v in value]
    return value


def dumps_json(payload: Any, indent: int = None) -> str:
    """Serialize deterministically (sorted keys, NaN as null)."""
    return json.dumps(
        _finite_or_none(payload), sort_keys=True, indent=indent, ensure_ascii=False
    )


def write_json(file_path: str, payload: Any) -> None:
    """Write one JSON document (UTF-8, LF-terminated)."""
    ensure_directory_exists(os.path.dirname(file_path))
    with open(file_path, "w", encoding="utf-8", newline="\n") as file:
        file.write(dumps_json(payload, indent=2))
        file.write("\n")


def read_json(file_path: str) -> Any:
    """Read one JSON document."""
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            return json.load(file)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"Cannot read JSON file {file_path}: {e}") from e


def write_jsonl(file_path: str, rows: Iterable[Dict[str, Any]]) -> None:
    """Write rows as JSON lines (UTF-8, LF-terminated)."""
    ensure_directory_exists(os.path.dirname(file_path))
    with open(file_path, "w", encoding="utf-8", newline="\n") as file:
        for row in rows:
            file.write(dumps_json(row))
            file.write("\n")


def append_jsonl(file_path: str, row: Dict[str, Any]) -> None:
    """Append a single JSON line."""
    with open(file_path, "a", encoding="utf-8", newline="\n") as file:
        file.write(dumps_json(row))
        file.write("\n")


def iter_jsonl(file_path: str) -> Iterator[Dict[str, Any]]:
    """
    Iterate over the JSON objects of a JSONL file.

    Parameters:
      file_path (str): JSONL file

    Returns:
      Iterator[Dict]: One parsed object per non-blank line
    """

    try:
        with open(file_path, "r", encoding="utf-8") as file:
            for line_number, line in enumerate(file, start=1):
                if not line.strip():
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as e:
                    raise ValidationError(
                        f"{file_path}:{line_number}: invalid JSON ({e})"
                    ) from e
    except OSError as e:
        raise ValidationError(f"Cannot read {file_path}: {e}") from e


def read_jsonl(file_path: str) -> List[Dict[str, Any]]:
    """Read a whole JSONL file into a list."""
    return list(iter_jsonl(file_path))


def write_compressed_json(file_path: str, payload: Any) -> None:
    """
    Write a JSON payload compressed with lz4 frames.

    Parameters:
      file_path (str): Destination file
      payload (Any): JSON-serializable object
    """

    ensure_directory_exists(os.path.dirname(file_path))
    raw = dumps_json(payload).encode("utf-8")
    with lz4.frame.open(file_path, mode="wb") as compressed:
        compressed.write(raw)


def read_compressed_json(file_path: str) -> Any:
    """
    Read a JSON payload written by write_compressed_json.

    Parameters:
      file_path (str): Source file

    Returns:
      Any: Parsed JSON payload
    """

    try:
        with lz4.frame.open(file_path, mode="rb") as compressed:
            return json.loads(compressed.read().decode("utf-8"))
    except (OSError, RuntimeError, ValueError) as e:
        raise ValidationError(f"Cannot read compressed file {file_path}: {e}") from e

"""Data validation and error handling utilities."""

import os
from typing import Dict, List, Optional


class ToolkitError(Exception):
    """Base error for every failure raised by the toolkit."""

    exit_code = 2


class DimensionError(ToolkitError, ValueError):
    """Operand shapes do not agree."""


class NumericError(ToolkitError, ArithmeticError):
    """A value became non-finite."""


class TrainingDivergedError(NumericError):
    """The training objective became non-finite."""


class GradientStateError(ToolkitError):
    """Backward pass requested while leaf gradients from a previous pass are live."""


class CapacityError(ToolkitError):
    """A lookup table is too small for the requested position."""


class FrequencyEstimateError(ToolkitError):
    """Mispronunciation frequencies cannot be estimated from the corpus."""


class ValidationError(ToolkitError):
    """User supplied input (config, corpus, files) is invalid."""

    exit_code = 1


class ConfigError(ValidationError):
    """Configuration key or value is invalid."""


class StructureError(ValidationError):
    """An utterance violates the word/silence structure contract."""


class AlignmentError(ValidationError):
    """Feature rows are not aligned with the canonical phone sequence."""


class CheckpointError(ValidationError):
    """A checkpoint is unreadable or does not match its config."""


class SchemaMismatchError(ValidationError):
    """Reports or files with incompatible schemas were combined."""


class OutputExistsError(ValidationError):
    """Output directory already holds files."""


class CorpusValidationError(ValidationError):
    """One or more corpus records failed validation."""

    def __init__(self, problems: Dict[str, List[str]]):
        self.problems = problems
        lines = [
            f"{utt_id}: {'; '.join(messages)}"
            for utt_id, messages in sorted(problems.items())
        ]
        super().__init__(
            f"{len(problems)} invalid record(s):\n" + "\n".join(lines)
        )


def validate_file_exists(file_path: str) -> bool:
    """
    Validate that a file exists.

    Parameters:
      file_path (str): Path to the file

    Returns:
      bool: True if file exists, False otherwise
    """

    return os.path.exists(file_path) and os.path.isfile(file_path)


def validate_file_extension(file_path: str, allowed_extensions: List[str]) -> tuple:
    """
    Validate file extension.

    Parameters:
      file_path (str): Path to the file
      allowed_extensions (List[str]): List of allowed extensions (with dots)

    Returns:
      tuple: (is_valid, error_message)
    """

    if not file_path:
        return False, "File path cannot be empty"

    name = os.path.basename(file_path).lower()
    if not any(name.endswith(e.lower()) for e in allowed_extensions):
        return (
            False,
            f"Invalid file extension: {name}. Allowed: {', '.join(allowed_extensions)}",
        )

    return True, ""


def require_file(file_path: str, allowed_extensions: Optional[List[str]] = None) -> None:
    """
    Raise a ValidationError when a required input file is missing or misnamed.

    Parameters:
      file_path (str): Path to the file
      allowed_extensions (List[str], optional): Accepted suffixes
    """

    if not validate_file_exists(file_path):
        raise ValidationError(f"File does not exist: {file_path}")
    if allowed_extensions:
        is_valid, error_message = validate_file_extension(file_path, allowed_extensions)
        if not is_valid:
            raise ValidationError(error_message)

"""CSV file generator module."""

import csv
import os
from typing import Any, Dict, List, Optional

from util.file_util import ensure_directory_exists
from util.log_util import get_logger

logger = get_logger("data.csv")


class CSVGenerator:
    """Manages CSV file creation and row appends for reports, curves and sweeps."""

    def __init__(self, csv_file_path: str, headers: List[str]):
        self.csv_file_path = csv_file_path
        self.headers = list(headers)

    def create_csv(self) -> bool:
        """
        Create a new CSV file with headers.

        Returns:
          bool: True if generation successful, False otherwise
        """
        try:
            ensure_directory_exists(os.path.dirname(self.csv_file_path))
            with open(self.csv_file_path, "w", newline="", encoding="utf-8") as file:
                writer = csv.DictWriter(file, fieldnames=self.headers, lineterminator="\n")
                writer.writeheader()
            return True
        except OSError as e:
            logger.error("Could not create %s: %s", self.csv_file_path, e)
            return False

    def add_rows(self, rows: List[Dict[str, Any]]) -> bool:
        """
        Append rows; missing fields are written empty and non-finite floats as blanks.

        Parameters:
            rows (List[Dict[str, Any]]): Row dictionaries keyed by header

        Returns:
            bool: True if successful, False otherwise
        """
        try:
            with open(self.csv_file_path, "a", newline="", encoding="utf-8") as file:
                writer = csv.DictWriter(
                    file, fieldnames=self.headers, extrasaction="ignore", lineterminator="\n"
                )
                writer.writerows([{k: _cell(row.get(k)) for k in self.headers} for row in rows])
            return True
        except OSError as e:
            logger.error("Could not append to %s: %s", self.csv_file_path, e)
            return False

    def write(self, rows: List[Dict[str, Any]]) -> bool:
        """Create the file and write every row."""
        return self.create_csv() and self.add_rows(rows)


def _cell(value: Optional[Any]) -> Any:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if value != value or value in (float("inf"), float("-inf")) else repr(value)
    return value

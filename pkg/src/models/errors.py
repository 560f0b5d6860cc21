"""Exception hierarchy for the sensor-selection toolkit.

Every fault raised on purpose derives from ``SensorSelectionError``; the CLI
maps it to exit code 1. I/O faults stay as ``OSError`` (exit code 2).
"""

from typing import Any


class SensorSelectionError(Exception):
    """Base class for validation and parse faults."""

    pass


class MatrixValidationError(SensorSelectionError):
    """Decision matrix violates one or more invariants."""

    def __init__(self, violations: list[Any]) -> None:
        self.violations = list(violations)
        details = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"Invalid decision matrix: {details}{more}")


class DimensionMismatchError(SensorSelectionError):
    """Option row length does not match the criteria count."""

    pass


class InvalidArgumentError(SensorSelectionError):
    """Argument outside its admissible range."""

    pass


class DatasetFormatError(SensorSelectionError):
    """Dataset CSV or criteria descriptor is malformed."""

    pass


class ResultsFormatError(SensorSelectionError):
    """Results, ranking or partition file is malformed."""

    pass


class CellExecutionError(SensorSelectionError):
    """A grid cell failed; carries the cell coordinates."""

    def __init__(self, cell: dict[str, Any], cause: Exception) -> None:
        self.cell = dict(cell)
        self.cause = cause
        coords = ", ".join(f"{key}={value}" for key, value in self.cell.items())
        super().__init__(f"Cell ({coords}) failed: {cause}")

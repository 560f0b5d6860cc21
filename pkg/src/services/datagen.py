"""
Synthetic sensor-description datasets and dataset persistence.

Random stream contract: numpy's PCG64 bit generator seeded with
``SeedSequence(seed)``; raw 64-bit outputs are consumed in row-major order
(sensor by sensor, attribute by attribute) and mapped to [0, 1) as
``(raw >> 11) * 2**-53``. Cell = low + (high - low) * u. Only the bit
generator's raw stream is used, which numpy keeps stable across versions and
platforms, so a seed always yields the same cells.
"""

import json
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.models.criteria import CriteriaSet, CriterionSpec, Direction
from src.models.errors import DatasetFormatError, InvalidArgumentError, MatrixValidationError
from src.models.matrix import DecisionMatrix, default_option_ids
from src.utils.logging import get_logger
from src.utils.tabular import read_string_table

logger = get_logger(__name__)

MAX_SEED = 2**64 - 1
MIN_PROPERTIES = 2


class AttributeRange(BaseModel):
    """Uniform sampling range of one sensor attribute."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    direction: Direction
    low: float
    high: float
    unit: str = ""

    @model_validator(mode="after")
    def check_bounds(self) -> "AttributeRange":
        if not self.low < self.high:
            raise ValueError(f"{self.name}: low ({self.low}) must be below high ({self.high})")
        return self


CANONICAL_ATTRIBUTES: tuple[AttributeRange, ...] = (
    AttributeRange(name="battery", direction=Direction.MAXIMIZE, low=0.0, high=100.0, unit="%"),
    AttributeRange(name="price", direction=Direction.MINIMIZE, low=1.0, high=1000.0, unit="currency"),
    AttributeRange(name="drift", direction=Direction.MINIMIZE, low=0.0, high=10.0, unit="%"),
    AttributeRange(name="frequency", direction=Direction.MAXIMIZE, low=0.1, high=100.0, unit="Hz"),
    AttributeRange(
        name="energy_consumption", direction=Direction.MINIMIZE, low=1.0, high=500.0, unit="mW"
    ),
    AttributeRange(
        name="response_time", direction=Direction.MINIMIZE, low=1.0, high=5000.0, unit="ms"
    ),
)

CANONICAL_ORDER: tuple[str, ...] = tuple(a.name for a in CANONICAL_ATTRIBUTES)


class GeneratorConfig(BaseModel):
    """Synthetic dataset parameters."""

    model_config = ConfigDict(frozen=True)

    n_sensors: int = Field(ge=1)
    seed: int = Field(ge=0, le=MAX_SEED)
    attributes: tuple[AttributeRange, ...] = Field(default=CANONICAL_ATTRIBUTES, min_length=1)

    @field_validator("attributes")
    @classmethod
    def unique_names(cls, v: tuple[AttributeRange, ...]) -> tuple[AttributeRange, ...]:
        names = [a.name for a in v]
        if len(set(names)) != len(names):
            raise ValueError(f"Attribute names must be unique: {names}")
        return v


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """``count`` doubles in [0, 1) from the documented PCG64 raw stream."""
    bit_generator = np.random.PCG64(np.random.SeedSequence(seed))
    raw = bit_generator.random_raw(size=count)
    return (raw >> np.uint64(11)).astype(np.float64) * (2.0**-53)


def generate(config: GeneratorConfig) -> DecisionMatrix:
    """Draw every cell independently and uniformly from its attribute range."""
    m, n = config.n_sensors, len(config.attributes)
    low = np.array([a.low for a in config.attributes], dtype=np.float64)
    high = np.array([a.high for a in config.attributes], dtype=np.float64)

    u = uniform_stream(config.seed, m * n).reshape(m, n)
    values = low + (high - low) * u

    criteria = CriteriaSet(
        criteria=tuple(CriterionSpec(name=a.name, direction=a.direction) for a in config.attributes)
    )
    logger.info("Dataset generated", n_sensors=m, attributes=n, seed=config.seed)
    return DecisionMatrix.from_rows(values, criteria, default_option_ids(m))


def project_properties(matrix: DecisionMatrix, n_properties: int) -> DecisionMatrix:
    """
    Keep the first ``n_properties`` context properties.

    Columns are taken in canonical order (battery, price, drift, frequency,
    energy_consumption, response_time); columns with other names follow in
    their stored order.
    """
    if not MIN_PROPERTIES <= n_properties <= matrix.n_criteria:
        raise InvalidArgumentError(
            f"n_properties must be in {MIN_PROPERTIES}..{matrix.n_criteria}, got {n_properties}"
        )
    names = matrix.criteria.names
    rank = {name: i for i, name in enumerate(CANONICAL_ORDER)}
    ordered = sorted(range(len(names)), key=lambda j: (rank.get(names[j], len(rank)), j))
    if n_properties == matrix.n_criteria and ordered == list(range(len(names))):
        return matrix
    return matrix.select_columns(ordered[:n_properties])


def descriptor_path_for(path: Path) -> Path:
    """Sidecar criteria descriptor next to a dataset CSV: ``data.csv`` -> ``data.criteria.json``."""
    return path.with_suffix(".criteria.json")


def save_dataset(matrix: DecisionMatrix, path: Path) -> Path:
    """
    Write ``id,<criteria...>`` CSV plus the sidecar criteria descriptor.

    Cells are written with ``repr`` so every float reads back bit-identical.

    Returns:
        Path of the descriptor written next to the CSV
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"id": list(matrix.option_ids)})
    for j, name in enumerate(matrix.criteria.names):
        frame[name] = [repr(float(x)) for x in matrix.values[:, j]]
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")

    descriptor = descriptor_path_for(path)
    descriptor.write_text(
        json.dumps(matrix.criteria.to_descriptor(), indent=2) + "\n", encoding="utf-8"
    )
    logger.info("Dataset saved", path=str(path), descriptor=str(descriptor), shape=matrix.shape)
    return descriptor


def _load_descriptor(descriptor: Path, dataset: Path) -> CriteriaSet:
    if not descriptor.exists():
        raise DatasetFormatError(
            f"Criteria descriptor for {dataset} not found; expected {descriptor}"
        )
    try:
        entries = json.loads(descriptor.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetFormatError(
            f"{descriptor}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    if not isinstance(entries, list) or not entries:
        raise DatasetFormatError(f"{descriptor}: expected a non-empty list of criteria")

    specs = []
    for i, entry in enumerate(entries):
        try:
            specs.append(CriterionSpec.model_validate(entry))
        except ValidationError as e:
            raise DatasetFormatError(f"{descriptor}: criterion #{i + 1} is invalid: {e}") from e
    return CriteriaSet(criteria=tuple(specs))


def _parse_column(raw: np.ndarray, name: str, column: int, path: Path) -> np.ndarray:
    try:
        return np.array(raw, dtype=np.float64)
    except ValueError:
        for row, text in enumerate(raw):
            try:
                float(text)
            except ValueError:
                # header is line 1
                raise DatasetFormatError(
                    f"{path}: line {row + 2}, column {column + 1} ({name}): "
                    f"cannot parse {text!r} as a number"
                ) from None
        raise


def load_dataset(path: Path, descriptor: Optional[Path] = None) -> DecisionMatrix:
    """
    Read a dataset written by ``save_dataset``.

    Raises:
        FileNotFoundError: If the CSV does not exist
        DatasetFormatError: If the CSV or descriptor is malformed or they disagree
    """
    path = Path(path)
    descriptor = descriptor or descriptor_path_for(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset not found: {path}")
    criteria = _load_descriptor(descriptor, path)

    try:
        frame = read_string_table(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DatasetFormatError(f"{path}: {e}") from e

    header = list(frame.columns)
    if not header or header[0] != "id":
        raise DatasetFormatError(f"{path}: first column must be 'id', got {header[:1]}")
    if header[1:] != criteria.names:
        raise DatasetFormatError(
            f"{path}: header criteria {header[1:]} do not match descriptor "
            f"{descriptor} criteria {criteria.names}"
        )

    columns = [
        _parse_column(frame[name].to_numpy(), name, j + 1, path)
        for j, name in enumerate(criteria.names)
    ]
    values = np.column_stack(columns) if columns else np.empty((len(frame), 0))
    try:
        matrix = DecisionMatrix.from_rows(values, criteria, frame["id"].tolist())
    except MatrixValidationError as e:
        raise DatasetFormatError(f"{path}: {e}") from e
    logger.info("Dataset loaded", path=str(path), shape=matrix.shape)
    return matrix

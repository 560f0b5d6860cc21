"""Pytest configuration and fixtures for all tests."""

import os

import pytest

# Set test environment variables before importing settings
os.environ["APP_ENV"] = "testing"
os.environ["LOG_FORMAT"] = "console"
os.environ["LOG_LEVEL"] = "WARNING"
os.environ.pop("HARNESS_MAX_WORKERS", None)
os.environ.pop("VIKOR_DEFAULT_V", None)

from src.models import CriteriaSet, DecisionMatrix  # noqa: E402
from src.services.datagen import GeneratorConfig, generate  # noqa: E402


@pytest.fixture
def two_criteria() -> CriteriaSet:
    """(max, min) criteria, equal weights."""
    return CriteriaSet.of(("battery", "max"), ("price", "min"))


@pytest.fixture
def small_matrix(two_criteria) -> DecisionMatrix:
    """3 sensors over battery (max) and price (min)."""
    return DecisionMatrix.from_rows(
        [[80.0, 120.0], [95.0, 300.0], [60.0, 90.0]],
        two_criteria,
        ["a", "b", "c"],
    )


@pytest.fixture
def chain_matrix() -> DecisionMatrix:
    """Each option dominates the next on both maximize criteria."""
    return DecisionMatrix.from_rows(
        [[3.0, 3.0], [2.0, 2.0], [1.0, 1.0]],
        CriteriaSet.of(("x", "max"), ("y", "max")),
    )


@pytest.fixture
def sensors() -> DecisionMatrix:
    """300 synthetic sensors over the six canonical attributes."""
    return generate(GeneratorConfig(n_sensors=300, seed=7))

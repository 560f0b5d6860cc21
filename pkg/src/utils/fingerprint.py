"""Content fingerprints for datasets."""

import hashlib
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from src.models.matrix import DecisionMatrix


def compute_content_hash(content: bytes, algorithm: str = "sha256") -> str:
    """
    Compute cryptographic hash of byte content.

    Args:
        content: Byte content
        algorithm: Hash algorithm

    Returns:
        ``"<algorithm>:<hexdigest>"``
    """
    hasher = hashlib.new(algorithm)
    hasher.update(content)
    return f"{algorithm}:{hasher.hexdigest()}"


def matrix_fingerprint(matrix: "DecisionMatrix", algorithm: str = "sha256") -> str:
    """
    Fingerprint a decision matrix by ids, criteria and raw cell bytes.

    Two matrices share a fingerprint iff they are cell-exact equal with the
    same option ids and criteria metadata.
    """
    ids = "\x1f".join(matrix.option_ids).encode("utf-8")
    criteria = "\x1f".join(
        f"{spec.name}|{spec.direction.value}|{spec.weight!r}" for spec in matrix.criteria.criteria
    ).encode("utf-8")
    cells = np.ascontiguousarray(matrix.values, dtype="<f8").tobytes()
    return compute_content_hash(b"\x1e".join([ids, criteria, cells]), algorithm)

"""Published n_t = 4 codebooks for messages 0..15, one string per matrix (rows top to bottom)."""

from __future__ import annotations

import numpy as np

__all__ = ["REFERENCE_CODEBOOKS", "reference_matrices"]

REFERENCE_CODEBOOKS: dict[str, tuple[str, ...]] = {
    "1/4": (
        "0001 0010 0100 1000",
        "0001 0010 1000 0100",
        "0001 0100 0010 1000",
        "0001 0100 1000 0010",
        "0001 1000 0010 0100",
        "0001 1000 0100 0010",
        "0010 0001 0100 1000",
        "0010 0001 1000 0100",
        "0010 0100 0001 1000",
        "0010 0100 1000 0001",
        "0010 1000 0001 0100",
        "0010 1000 0100 0001",
        "0100 0001 0010 1000",
        "0100 0001 1000 0010",
        "0100 0010 0001 1000",
        "0100 0010 1000 0001",
    ),
    "2/4": (
        "1001 0011 0110 1100",
        "1001 0011 1100 0110",
        "1001 0110 0011 1100",
        "1001 0110 1100 0011",
        "1001 1100 0011 0110",
        "1001 1100 0110 0011",
        "0011 1001 0110 1100",
        "0011 1001 1100 0110",
        "0011 0110 1001 1100",
        "0011 0110 1100 1001",
        "0011 1100 1001 0110",
        "0011 1100 0110 1001",
        "0110 1001 0011 1100",
        "0110 1001 1100 0011",
        "0110 0011 1001 1100",
        "0110 0011 1100 1001",
    ),
    "3/4": (
        "1101 1011 0111 1110",
        "1101 1011 1110 0111",
        "1101 0111 1011 1110",
        "1101 0111 1110 1011",
        "1101 1110 1011 0111",
        "1101 1110 0111 1011",
        "1011 1101 0111 1110",
        "1011 1101 1110 0111",
        "1011 0111 1101 1110",
        "1011 0111 1110 1101",
        "1011 1110 1101 0111",
        "1011 1110 0111 1101",
        "0111 1101 1011 1110",
        "0111 1101 1110 1011",
        "0111 1011 1101 1110",
        "0111 1011 1110 1101",
    ),
}


def reference_matrices(gamma: str) -> np.ndarray:
    """The 16 reference matrices for ``gamma`` in ``{"1/4", "2/4", "3/4"}`` as a ``(16, 4, 4)`` array."""
    rows = [[[int(c) for c in row] for row in m.split()] for m in REFERENCE_CODEBOOKS[gamma]]
    return np.array(rows, dtype=np.uint8)

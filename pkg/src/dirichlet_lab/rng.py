"""Deterministic, splittable random streams.

Every random draw in the library comes from a named substream keyed by
(seed, label, index).  Streams are counter-based (Philox), so parallel
schedules cannot reorder draws: sample i always sees the same bits no
matter which thread computes it.  The concrete generator is pinned by a
golden-value test.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ValidationError


def substream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Independent generator for (seed, label, index)."""
    if index < 0:
        raise ValidationError(f"substream index must be >= 0, got {index}")
    material = f"{int(seed)}|{label}|{int(index)}".encode()
    digest = hashlib.sha256(material).digest()
    key = int.from_bytes(digest[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def sample_torus(stream: np.random.Generator, m: int, n: int) -> np.ndarray:
    """Uniform m x n matrix over the unit torus [0,1)^{m*n}."""
    return stream.random((m, n))


def sample_torus_fixedpoint(stream: np.random.Generator, m: int, n: int, bits: int):
    """Uniform fixed-point torus sample: integer matrix num with A = num / 2**bits.

    Used where orbit computations need exact arithmetic far beyond double
    precision; entries are forced odd so num/2**bits is in lowest terms.
    """
    if bits < 8:
        raise ValidationError("fixedpoint sampling needs bits >= 8")
    words = (bits + 31) // 32
    raw = stream.integers(0, 1 << 32, size=(m, n, words), dtype=np.uint64)
    num = [[0] * n for _ in range(m)]
    for i in range(m):
        for j in range(n):
            v = 0
            for k in range(words):
                v = (v << 32) | int(raw[i, j, k])
            v &= (1 << bits) - 1
            num[i][j] = v | 1
    return num, 1 << bits

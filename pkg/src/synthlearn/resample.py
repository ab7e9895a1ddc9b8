"""Circular block resampling."""

from __future__ import annotations

import numpy as np

__all__ = ["circular_block_indices", "default_block_size", "replicate_rng"]


def circular_block_indices(eligible, b: int, out_len: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a circular block bootstrap sample of ``eligible``.

    The ordered ``eligible`` sequence is wrapped into a circle and
    ``ceil(out_len / b)`` runs of ``b`` consecutive entries are drawn with
    uniformly chosen starting positions.  The concatenation is truncated to
    ``out_len``.

    Returns the selected elements of ``eligible`` (not positions).
    """
    eligible = np.asarray(eligible)
    n = eligible.size
    b = int(b)
    if b < 1:
        raise ValueError("block size must be positive")
    if b > n:
        raise ValueError(f"block size {b} exceeds the {n} eligible indices")
    n_blocks = -(-int(out_len) // b)
    starts = rng.integers(0, n, size=n_blocks)
    pos = (starts[:, None] + np.arange(b)[None, :]) % n
    return eligible[pos.ravel()[:out_len]]


def default_block_size(n: int) -> int:
    """``max(2, round(n ** (1/3)))``."""
    return max(2, int(round(n ** (1.0 / 3.0))))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate ``index`` of a run seeded by ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))

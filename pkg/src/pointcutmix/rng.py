"""Deterministic random streams and seed derivation for batch jobs.

Every stochastic choice in the toolkit draws from an explicitly passed
generator, and batch work derives one independent stream per output
sample, so scheduling order and worker count cannot change results.
"""

from __future__ import annotations

import numpy as np

RngStream = np.random.Generator

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64(*words: int) -> int:
    """Hash integer words into one well-mixed 64-bit seed.

    Used as mix64(base_seed, epoch, sample_index) to give every output
    sample its own stream; the chaining keeps distinct word tuples from
    colliding even when individual words are small counters.
    """
    state = 0
    for w in words:
        state = _splitmix64(state ^ (int(w) & _MASK64))
    return state


def make_stream(seed: int) -> RngStream:
    """Seeded deterministic generator: same seed, same call sequence,
    same draws."""
    return np.random.default_rng(int(seed) & _MASK64)

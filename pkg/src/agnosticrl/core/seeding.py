"""Deterministic random streams derived from a single master seed"""

import numpy as np


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """Build a generator for the stream addressed by (master_seed, *keys).

    Streams with different keys are statistically independent, and the same
    address always yields the same stream regardless of which process asks.
    """
    if master_seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seeds and stream keys must be non-negative")
    sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(sequence)

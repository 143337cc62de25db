"""Seed derivation for reproducible parallel work.

Every random stream is a Philox generator keyed by ``SeedSequence(seed, spawn_key=keys)``,
so the stream for tree ``t`` of a forest depends only on (master seed, t) and never on
which worker grows it.
"""

import math

import numpy as np

RNG_SCHEME = "philox-seedsequence-v1"


def generator(seed: int, *keys: int) -> np.random.Generator:
    """Return the counter-based generator for ``(seed, *keys)``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a child integer seed from ``(seed, *keys)``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from -inf (2.5 -> 3)."""
    return int(math.floor(value + 0.5))

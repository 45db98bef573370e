"""Deterministic RNG substreams derived from a single master seed.

Every stochastic component draws from its own substream, keyed by an
integer path (e.g. repetition index, bootstrap iteration index), so a
parallel schedule reproduces the serial output exactly.
"""

import numpy as np

DEFAULT_SEED = 12345


def master_sequence(seed):
    """Wrap an integer seed in a SeedSequence (pass-through if already one)."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def substream(seed, *path):
    """Return a Generator for the substream identified by an index path.

    substream(seed, i, j) is independent of substream(seed, i, k) for
    j != k, and depends only on (seed, i, j), never on call order.
    """
    root = master_sequence(seed)
    child = np.random.SeedSequence(entropy=root.entropy, spawn_key=tuple(int(p) for p in path))
    return np.random.default_rng(child)

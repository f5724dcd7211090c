"""Deterministic random-stream derivation.

Every stochastic routine takes an integer seed and derives an isolated
generator from (seed, stream, index...) so results never depend on call
order, thread count, or scheduling.
"""

from __future__ import annotations

import numpy as np

# Fixed stream ids; never renumber, serialized results depend on them.
STREAM_LOUVAIN = 1
STREAM_CONSENSUS = 2
STREAM_REWIRE = 3
STREAM_LATTICE = 4
STREAM_SWP = 5
STREAM_TEMPORAL_NULL = 6
STREAM_WINDOW = 7
STREAM_GAMMA = 8


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Return a Generator for the stream identified by (seed, *path)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def derive_seed(seed: int, *path: int) -> int:
    """Collapse (seed, *path) to a single derived integer seed."""
    ss = np.random.SeedSequence([int(seed), *map(int, path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])

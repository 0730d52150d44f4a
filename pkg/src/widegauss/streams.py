"""Deterministic random streams.

All randomness in the package flows through Philox counter-based bit
generators keyed by ``numpy.random.SeedSequence`` spawn paths.  A stream is
addressed by a user seed plus a tuple of small integers (purpose tag, layer
index, replicate index, ...), so any matrix or sample can be regenerated in
isolation, in any order, on any worker.  Nothing here depends on global
state.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "PURPOSE_WEIGHTS",
    "PURPOSE_GAUSSIAN_FDD",
    "PURPOSE_BIAS",
    "substream",
]

# Purpose tags keep independent uses of the same user seed from colliding.
PURPOSE_WEIGHTS = 0
PURPOSE_GAUSSIAN_FDD = 1
PURPOSE_BIAS = 2


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the Philox stream addressed by ``(seed, *path)``.

    Identical ``(seed, path)`` pairs always yield identical streams;
    distinct paths yield statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))

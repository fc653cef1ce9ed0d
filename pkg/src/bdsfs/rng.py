"""Deterministic random streams for replicate-parallel simulation.

Every replicate draws from its own generator, derived from the master seed,
an arm/stream label and the replicate index.  Results therefore do not depend
on how replicates are distributed over workers.
"""

from __future__ import annotations

import numpy as np


def replicate_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Return the generator for replicate ``index`` of ``stream``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)

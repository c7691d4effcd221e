"""Deterministic stream splitting for parallel ensembles.

Every stochastic routine in this package takes an explicit
``numpy.random.Generator``.  Ensemble drivers derive one independent
generator per replica from a single master seed with :func:`stream`, so
results do not depend on scheduling order and reruns with the same seed
are byte-identical.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "substreams"]


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for one worker.

    ``path`` is a tuple of indices (replica number, sub-task number, ...)
    identifying the consumer.  Distinct paths give statistically
    independent Philox streams; the same (seed, path) always gives the
    same stream.
    """
    key = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(key))


def substreams(master_seed: int, n: int, *prefix: int) -> list[np.random.Generator]:
    """n independent generators, one per replica, under a common prefix."""
    return [stream(master_seed, *prefix, i) for i in range(n)]

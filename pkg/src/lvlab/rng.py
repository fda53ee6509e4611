"""Seeded, splittable random streams.

Every replicate ``r`` of a batch draws from ``substream(seed, r)``, a Philox
(counter-based) generator keyed by ``SeedSequence(seed, spawn_key=(r,))``.
Results therefore do not depend on the order in which replicates run.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return substream(seed_or_rng)


# keys for streams that are not replicates; far above any replicate index
GRAPH_STREAM = 1 << 40
CP_STREAM = (1 << 40) + 1

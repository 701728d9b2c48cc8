"""Named substreams off one master seed.

Every random draw in a run comes from a substream addressed by (seed, name),
so adding a new consumer never shifts the draws of existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "big")
    return np.random.default_rng([seed, tag])

"""Counter-based random substreams.

Every random draw in a run comes from a generator keyed by a tuple such as
``(trial, frame, slot)`` under one master seed. Schemes that share a key see
identical numbers, which is what makes scheme comparisons paired.
"""
from __future__ import annotations

import zlib

import numpy as np

_PLAIN = (int, np.integer)


def _key_word(part) -> int:
    if isinstance(part, _PLAIN):
        if part < 0:
            raise ValueError("substream keys must be non-negative")
        return int(part)
    # string tags live far above any slot/frame counter
    return (1 << 40) + zlib.crc32(str(part).encode())


def substream(seed: int, *key) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key_word(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))

"""Seeded, splittable random streams.

Every stream is a Philox counter-based generator keyed by ``(seed, substream)``
through :class:`numpy.random.SeedSequence`, so substream ``i`` is the same no
matter which worker draws it.
"""

from __future__ import annotations

import numpy as np

SEED_MAX = 2**64 - 1
# samples per substream when a large draw is split into chunks
CHUNK = 1 << 16


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    return int(seed)


def stream(seed: int, substream: int = 0) -> np.random.Generator:
    """Independent generator for ``substream`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=check_seed(seed), spawn_key=(int(substream),))
    return np.random.Generator(np.random.Philox(ss))


def chunks(n: int, size: int = CHUNK) -> list[tuple[int, int]]:
    """Split ``n`` draws into ``(substream, count)`` pieces."""
    out = []
    i = 0
    while n > 0:
        k = min(size, n)
        out.append((i, k))
        n -= k
        i += 1
    return out

"""Reproducible random number generation.

All randomness in the package flows through Philox (4x64), a counter-based
generator with a platform-independent stream, wrapped in numpy's ``Generator``.
Substreams are derived with ``SeedSequence`` spawn keys, so (seed, replica) or
(seed, purpose) pairs give independent streams no matter how work is sharded.
"""

from __future__ import annotations

from zlib import crc32

from numpy.random import Generator, Philox, SeedSequence


def _key_part(x):
    if isinstance(x, str):
        return crc32(x.encode())
    return int(x)


def spawn_generator(seed, *key):
    """A Generator for (seed, *key); keys may be ints or short purpose strings."""
    ss = SeedSequence(entropy=int(seed), spawn_key=tuple(_key_part(k) for k in key))
    return Generator(Philox(ss))

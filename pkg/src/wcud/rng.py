"""Seeded randomization sources.

Every consumer of randomness (row permutations, rotation vectors, IID
baselines, acceptance-rejection fallbacks) draws from its own Philox
sub-stream keyed by ``(master seed, label, *indices)``.  Philox is a
counter-based generator with a 256-bit counter/key, so sub-streams are
independent and a replication's draws do not depend on scheduling order.
"""

import hashlib

import numpy as np


def _label_key(label):
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def substream(seed, label, *indices):
    """Return a ``numpy.random.Generator`` for one named consumer.

    >>> a = substream(7, "rotation", 3).random()
    >>> b = substream(7, "rotation", 3).random()
    >>> a == b
    True
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    for i in indices:
        if i < 0:
            raise ValueError(f"sub-stream indices must be non-negative, got {indices}")
    entropy = [int(seed) & 0xFFFFFFFF, int(seed) >> 32, *_label_key(label), *map(int, indices)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def iid_units(seed, label, n, *indices):
    """``n`` IID U[0,1) values from the named sub-stream."""
    return substream(seed, label, *indices).random(n)


class UnitStream:
    """Inexhaustible IID unit stream consumed one value at a time.

    Used where a consumer needs an unknown number of draws (acceptance-rejection
    retries).  Values are buffered in blocks so the sequence of returned values
    is identical regardless of how the caller interleaves ``next`` and ``take``.
    """

    def __init__(self, seed, label="fallback", *indices, block=4096):
        self._gen = substream(seed, label, *indices)
        self._block = block
        self._buf = np.empty(0)
        self._pos = 0
        self.consumed = 0

    def _refill(self):
        self._buf = self._gen.random(self._block)
        self._pos = 0

    def next(self):
        if self._pos >= self._buf.size:
            self._refill()
        value = float(self._buf[self._pos])
        self._pos += 1
        self.consumed += 1
        return value

    def take(self, n):
        return np.array([self.next() for _ in range(n)])

    def __iter__(self):
        while True:
            yield self.next()

"""Seeded, splittable random streams.

Each stream is a PCG64 generator keyed by ``(seed, *labels)`` through
``numpy.random.SeedSequence``, so the same seed and labels always reproduce
the same draws, independent of how many other streams exist.
"""
import zlib

import numpy as np


def _label_key(label):
    if isinstance(label, (int, np.integer)):
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def make_rng(seed, *labels):
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_label_key(x) for x in labels]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

"""Counter-based random streams keyed by (seed, experiment, index)."""
import zlib

import numpy as np


def stream(seed, experiment, index=0):
    """Independent generator per (seed, experiment, index); safe to create in any order."""
    key = (int(seed) & 0xFFFFFFFF) << 32 | zlib.crc32(experiment.encode("utf-8"))
    return np.random.Generator(np.random.Philox(key=key, counter=[0, int(index), 0, 0]))

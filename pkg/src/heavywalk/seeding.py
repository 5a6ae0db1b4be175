"""Counter-based stream derivation.

Replica ``i`` of a run with master seed ``m`` draws from
``Philox(SeedSequence(m, spawn_key=(i, *path)))`` where ``path`` holds the
CRC32 of each name in a sub-task path (``"U"``, ``"bootstrap"``, ...).
Streams therefore depend only on ``(m, i, path)``, never on scheduling.
"""
import zlib

import numpy as np


def _path_key(path):
    return tuple(p if isinstance(p, int) else zlib.crc32(str(p).encode()) for p in path)


def stream(master_seed, *path):
    """Return a Philox-backed ``Generator`` for a named path under ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=_path_key(path))
    return np.random.Generator(np.random.Philox(ss))


def replica_stream(master_seed, index, *path):
    return stream(master_seed, int(index), *path)


def data_seed(values):
    """Deterministic seed derived from the bytes of an array (bootstrap sub-seeds)."""
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    return zlib.crc32(arr.tobytes())

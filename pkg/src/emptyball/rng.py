"""Reproducible per-task random streams.

Every task draws from a Philox counter-based generator keyed by
(master seed, cell tag, task index). Streams depend only on that key, never
on how tasks are scheduled across workers.
"""
from __future__ import annotations

import zlib

import numpy as np


def cell_tag(*parts) -> int:
    """Stable 32-bit tag for a tuple of labels (e.g. method, n)."""
    return zlib.crc32(repr(parts).encode())


def task_stream(master_seed: int, *key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))

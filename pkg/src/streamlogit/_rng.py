"""Keyed random streams shared by the simulator, oracle and bench harness.

All randomness flows through Philox4x64-10 (``numpy.random.Philox``), a
counter-based generator with a documented algorithm. A stream is addressed
by a 128-bit key ``(seed, domain << 56 | index)``: the user seed in the
first word, a namespaced sub-stream index in the second. Domains keep data
generation, Monte-Carlo chunks and held-out tuning streams disjoint even
when they share a user seed.
"""

from __future__ import annotations

import numpy as np

DOMAIN_DATA = 0
DOMAIN_ORACLE = 1
DOMAIN_TUNING = 2

_MASK = (1 << 64) - 1
_INDEX_BITS = 56


def keyed_rng(seed: int, domain: int, index: int) -> np.random.Generator:
    """Generator for sub-stream ``index`` of ``domain`` under ``seed``."""
    if not 0 <= index < (1 << _INDEX_BITS):
        raise ValueError(f"stream index out of range: {index}")
    key = np.array([seed & _MASK, (domain << _INDEX_BITS) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))

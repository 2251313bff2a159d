"""Counter-based random-number streams for reproducible simulation.

Every (seed, cycle, purpose) triple keys its own Philox stream, so the draws
one cycle consumes never depend on execution order: serial and parallel runs
of the same configuration are bit-identical.
"""

from __future__ import annotations

import numpy as np

# purpose tags
LO_NOISE = 0
DETECTION = 1
TRANSIT = 2

_MAX_SEED = (1 << 64) - 1
_MAX_CYCLE = (1 << 62) - 1


def cycle_stream(seed: int, cycle: int, purpose: int) -> np.random.Generator:
    """Independent generator for one (seed, cycle, purpose) triple."""
    if not 0 <= seed <= _MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= cycle <= _MAX_CYCLE:
        raise ValueError(f"cycle index out of range: {cycle}")
    if not 0 <= purpose <= 3:
        raise ValueError(f"purpose tag out of range: {purpose}")
    key = (seed << 64) | (cycle << 2) | purpose
    return np.random.Generator(np.random.Philox(key=key))

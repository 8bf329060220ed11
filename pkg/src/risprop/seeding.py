"""Deterministic, counter-based random streams.

Every stochastic purpose in the package draws from its own Philox stream,
keyed by (run seed, stream id) with the block index in the counter's high
word. Blocks never overlap, so results are reproducible bit for bit and
independent of how draws are partitioned across workers.
"""

import numpy as np

STREAM_TRUTH_DRAWS = 1
STREAM_CONFIG = 2
STREAM_WINDOW = 3
STREAM_SYNTH = 4

_MAX_SEED = 2**64


def philox_generator(seed: int, stream: int, block: int = 0) -> np.random.Generator:
    """Generator for one (seed, stream, block) cell of the counter space."""
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if block < 0:
        raise ValueError(f"block index must be nonnegative, got {block}")
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=int(block) << 192))

"""Random-number plumbing shared by the samplers and Monte Carlo drivers.

Normal deviates come from the Box-Muller transform applied to the uniform
stream of a NumPy ``Generator`` (PCG64).  The transform is fixed so that other
implementations can reproduce the moments from their own uniform source.

Monte Carlo work is cut into fixed-size chunks.  Chunk ``i`` of stream ``s``
under master seed ``m`` draws from ``SeedSequence(m, spawn_key=(s, i))``.  The
sample stream therefore depends only on ``(m, s, i)``, never on how many
workers process the chunks.
"""

import math

import numpy as np

CHUNK_SIZE = 1 << 16


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
    n = math.prod(shape)
    m = (n + 1) // 2
    u1 = 1.0 - rng.random(m)  # (0, 1]
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * math.pi * u2
    z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
    return z.reshape(shape)


def chunk_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def chunk_sizes(total: int, chunk: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])

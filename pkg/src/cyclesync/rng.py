"""Seeded standard normals: PCG64 uniforms through the Marsaglia polar method.

The transform is spelled out here (rather than using numpy's own normal
sampler) so the stream is defined by the seed and this code alone.
"""

from __future__ import annotations

import numpy as np


def standard_normal(seed: int, size) -> np.ndarray:
    """``size`` independent N(0, 1) draws, reproducible from ``seed``."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    count = int(np.prod(shape))
    gen = np.random.Generator(np.random.PCG64(seed))
    chunks = []
    have = 0
    while have < count:
        pairs = (count - have + 1) // 2
        # acceptance rate is pi/4; oversample so one pass usually suffices
        u = 2.0 * gen.random((int(pairs / 0.78) + 8, 2)) - 1.0
        s = u[:, 0] ** 2 + u[:, 1] ** 2
        ok = (s > 0.0) & (s < 1.0)
        u, s = u[ok], s[ok]
        z = (u * np.sqrt(-2.0 * np.log(s) / s)[:, None]).ravel()
        chunks.append(z)
        have += z.size
    return np.concatenate(chunks)[:count].reshape(shape)

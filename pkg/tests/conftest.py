"""Shared generators for property-style tests.

All test randomness flows through the package's own seeded streams so every
run of the suite sees identical data.
"""

import numpy as np
import pytest

from ifsdist.maps import AffineMap, MapFamily, MapKind
from ifsdist.moments import MomentVector
from ifsdist.operator import PiecewiseCdf
from ifsdist.rng import RandomStream


def make_random_family(stream: RandomStream, n_min: int = 2, n_max: int = 12) -> MapFamily:
    """A random family of maps sending [0,1] into [0,1] with positive slopes."""
    n = n_min + int(stream.uniforms(1)[0] * (n_max - n_min + 1))
    n = min(n, n_max)
    slopes = 0.05 + 0.85 * stream.uniforms(n)
    offsets = stream.uniforms(n) * (1.0 - slopes)
    maps = tuple(AffineMap(a=float(a), b=float(b)) for a, b in zip(offsets, slopes))
    return MapFamily(maps, kind=MapKind.W1)


def make_random_moment_vector(stream: RandomStream, order: int) -> MomentVector:
    """Moments of a random discrete measure on [0,1]: always a valid sequence."""
    atoms = stream.uniforms(8)
    weights = stream.uniforms(8)
    weights = weights / weights.sum()
    g = np.array([np.sum(weights * atoms**k) for k in range(order + 1)])
    g[0] = 1.0
    return MomentVector(g)


def make_random_cdf(stream: RandomStream, grid_size: int = 512) -> PiecewiseCdf:
    """A random grid CDF mixing smooth growth, flats, and jumps."""
    increments = stream.uniforms(grid_size) ** 2
    flat = stream.uniforms(grid_size) < 0.3
    increments[flat] = 0.0
    jumps = stream.uniforms(grid_size) < 0.02
    increments[jumps] += 5.0 * stream.uniforms(int(np.count_nonzero(jumps)))
    total = increments.sum()
    if total == 0.0:
        increments[-1] = 1.0
        total = 1.0
    values = np.concatenate([[0.0], np.cumsum(increments / total)])
    values[-1] = 1.0
    return PiecewiseCdf(np.clip(values, 0.0, 1.0))


@pytest.fixture
def stream() -> RandomStream:
    return RandomStream(20260808)

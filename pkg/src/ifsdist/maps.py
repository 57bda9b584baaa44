"""Affine contraction maps and the families used to drive the estimator.

All families are built on the canonical unit interval: samples are rescaled
affinely to [0, 1] before any fitting, and results are mapped back at
evaluation time.  Three constructions are provided:

* dyadic maps (kind W1): 2**i translates of x/2**i at levels i = 1..levels,
* harmonic maps (kind W2): translates of x/i for i = 2..max_denominator,
* quantile maps (kinds Q1/Q2): one map per empirical quantile interval.

Quantile intervals of zero length (possible with ties) cannot be inverted,
so they are merged into a neighboring map; the family records how many raw
intervals each surviving map absorbed so uniform per-interval probabilities
can be reweighted accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .baselines import empirical_quantile
from .errors import DegenerateSampleError

__all__ = [
    "SupportInterval",
    "UNIT_SUPPORT",
    "AffineMap",
    "MapKind",
    "MapFamily",
    "build_dyadic_maps",
    "build_harmonic_maps",
    "build_quantile_maps",
    "invert_map",
]

_IMAGE_TOL = 1e-12


@dataclass(frozen=True)
class SupportInterval:
    """A compact support [alpha, beta] with alpha strictly below beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ValueError("support requires alpha < beta")

    @property
    def width(self) -> float:
        return self.beta - self.alpha

    def to_unit(self, x):
        """Affine rescale from [alpha, beta] onto [0, 1]."""
        return (np.asarray(x, dtype=float) - self.alpha) / self.width

    def from_unit(self, u):
        """Inverse rescale from [0, 1] back onto [alpha, beta]."""
        return self.alpha + np.asarray(u, dtype=float) * self.width


UNIT_SUPPORT = SupportInterval(0.0, 1.0)


@dataclass(frozen=True)
class AffineMap:
    """One contraction w(x) = a + b x with |b| < 1."""

    a: float
    b: float

    def __post_init__(self):
        if not abs(self.b) < 1.0:
            raise ValueError("affine map must be a contraction (|b| < 1)")

    def __call__(self, x):
        return self.a + self.b * np.asarray(x, dtype=float)


def invert_map(m: AffineMap, y):
    """Preimage (y - a) / b of a non-degenerate affine map."""
    if m.b == 0.0:
        raise ZeroDivisionError("zero-slope map has no inverse")
    return (np.asarray(y, dtype=float) - m.a) / m.b


class MapKind(str, Enum):
    W1 = "w1"
    W2 = "w2"
    Q1 = "q1"
    Q2 = "q2"


@dataclass(frozen=True)
class MapFamily:
    """An ordered family of contraction maps on the canonical support.

    ``merge_counts[i]`` is the number of raw quantile intervals absorbed by
    map i (all ones for non-quantile families); it sums to the requested
    interval count so uniform probabilities stay a simplex after merging.
    """

    maps: tuple[AffineMap, ...]
    kind: MapKind
    support: SupportInterval = UNIT_SUPPORT
    merge_counts: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(self.maps) == 0:
            raise ValueError("map family must be nonempty")
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.merge_counts:
            object.__setattr__(self, "merge_counts", (1,) * len(self.maps))
        if len(self.merge_counts) != len(self.maps):
            raise ValueError("merge_counts length must match number of maps")
        if self.support == UNIT_SUPPORT:
            for m in self.maps:
                lo, hi = sorted((m(0.0), m(1.0)))
                if lo < -_IMAGE_TOL or hi > 1.0 + _IMAGE_TOL:
                    raise ValueError(
                        f"map w(x) = {m.a} + {m.b} x does not keep [0,1] inside [0,1]"
                    )

    def __len__(self) -> int:
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    @property
    def intercepts(self) -> np.ndarray:
        return np.array([m.a for m in self.maps])

    @property
    def slopes(self) -> np.ndarray:
        return np.array([m.b for m in self.maps])

    @property
    def contractivity(self) -> float:
        return float(np.max(np.abs(self.slopes)))


def build_dyadic_maps(levels: int) -> MapFamily:
    """Dyadic family: maps (x + j - 1) / 2**i for i = 1..levels, j = 1..2**i.

    At each level i the 2**i images tile [0, 1] exactly; the family holds
    2**(levels + 1) - 2 maps in level-then-translate order.
    """
    if levels < 1:
        raise ValueError("dyadic family needs at least one level")
    maps = []
    for i in range(1, levels + 1):
        scale = 0.5**i
        maps.extend(AffineMap(a=(j - 1) * scale, b=scale) for j in range(1, 2**i + 1))
    return MapFamily(tuple(maps), kind=MapKind.W1)


def build_harmonic_maps(max_denominator: int) -> MapFamily:
    """Harmonic family: maps (x + j - 1) / i for i = 2..max_denominator, j = 2..i.

    Yields max_denominator * (max_denominator - 1) / 2 maps in the same
    index order.
    """
    if max_denominator < 2:
        raise ValueError("harmonic family needs max_denominator >= 2")
    maps = []
    for i in range(2, max_denominator + 1):
        maps.extend(AffineMap(a=(j - 1) / i, b=1.0 / i) for j in range(2, i + 1))
    return MapFamily(tuple(maps), kind=MapKind.W2)


def build_quantile_maps(values, num_maps: int, kind: MapKind = MapKind.Q1) -> MapFamily:
    """One map per empirical quantile interval of an already-rescaled sample.

    ``values`` must live on the canonical [0, 1] support.  The quantile grid
    puts num_maps + 1 equally spaced probabilities on [0, 1] (so the first
    and last quantiles are the sample minimum and maximum) and map i is
    w(x) = (q_{i+1} - q_i) x + q_i.  Zero-length intervals are merged into
    the previous surviving map (or the next one, at the left edge) and the
    returned family's merge_counts record the absorption.
    """
    if kind not in (MapKind.Q1, MapKind.Q2):
        raise ValueError("quantile families must use kind Q1 or Q2")
    if num_maps < 1:
        raise ValueError("need at least one quantile interval")
    v = np.asarray(getattr(values, "values", values), dtype=float)
    if v.size < 2 or np.min(v) == np.max(v):
        raise DegenerateSampleError("quantile maps need at least two distinct values")
    if np.min(v) < -_IMAGE_TOL or np.max(v) > 1.0 + _IMAGE_TOL:
        raise ValueError("quantile maps expect values rescaled to [0, 1]")

    u = np.arange(num_maps + 1) / num_maps
    q = np.asarray(empirical_quantile(v, u), dtype=float)

    maps: list[AffineMap] = []
    counts: list[int] = []
    pending = 0
    for lo, hi in zip(q[:-1], q[1:]):
        if hi - lo <= 0.0:
            if counts:
                counts[-1] += 1
            else:
                pending += 1
            continue
        maps.append(AffineMap(a=float(lo), b=float(hi - lo)))
        counts.append(1 + pending)
        pending = 0
    if not maps:
        raise DegenerateSampleError("every quantile interval is degenerate")
    return MapFamily(tuple(maps), kind=kind, merge_counts=tuple(counts))

"""Moment vectors and the linear transfer of moments under an affine IFS.

Pushing a measure through a family of affine maps with probabilities p sends
its k-th moment g_k to h_k = sum_i A_ki p_i where

    A_ki = sum_{j=0}^{k} C(k, j) b_i^j a_i^(k-j) g_j .

Everything here works on the canonical [0, 1] support, where valid moment
sequences satisfy 1 = g_0 >= g_1 >= ... >= g_M >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .maps import MapFamily, SupportInterval

__all__ = [
    "Sample",
    "MomentVector",
    "empirical_moments",
    "binomial_table",
    "transfer_matrix",
    "push_forward_moments",
]

_MONOTONE_TOL = 1e-12

DEFAULT_MOMENT_ORDER = 50
"""Default truncation order M.

The 1/k**2 weights of the collage objective bound the discarded tail of the
series by less than 1/M, and sample moments beyond this order carry no
usable signal at realistic sample sizes.
"""


@dataclass(frozen=True)
class Sample:
    """Observations plus the support the analyst declares for them.

    The declared support drives the affine rescale to [0, 1]; it is usually
    known a priori and deliberately NOT inferred from the data, since an
    estimator built on the sample range can only produce a distribution with
    exactly that range.
    """

    values: np.ndarray
    support: SupportInterval

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("sample must be a nonempty 1-d array")
        if np.min(v) < self.support.alpha or np.max(v) > self.support.beta:
            raise ValueError("sample values fall outside the declared support")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def rescaled(self) -> np.ndarray:
        """Values mapped affinely onto the canonical [0, 1] support."""
        return self.support.to_unit(self.values)


@dataclass(frozen=True)
class MomentVector:
    """Truncated raw-moment sequence (g_0 .. g_M) on the unit interval."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise ValueError("moment vector needs at least g_0 and g_1")
        if abs(g[0] - 1.0) > _MONOTONE_TOL:
            raise ValueError("g_0 must equal 1")
        if np.any(np.diff(g) > _MONOTONE_TOL) or g[-1] < -_MONOTONE_TOL or g[1] > 1.0 + _MONOTONE_TOL:
            raise ValueError("moments on [0, 1] must be non-increasing within [0, 1]")
        object.__setattr__(self, "g", g)

    @property
    def order(self) -> int:
        """Truncation order M (highest moment index)."""
        return self.g.size - 1

    @classmethod
    def uniform(cls, order: int) -> "MomentVector":
        """Moments of the uniform law on [0, 1]: g_k = 1/(k+1)."""
        return cls(1.0 / (1.0 + np.arange(order + 1)))

    @classmethod
    def beta(cls, shape_a: float, shape_b: float, order: int) -> "MomentVector":
        """Raw moments of Beta(a, b): g_k = prod_{r<k} (a+r)/(a+b+r)."""
        g = np.ones(order + 1)
        for k in range(1, order + 1):
            g[k] = g[k - 1] * (shape_a + k - 1) / (shape_a + shape_b + k - 1)
        return cls(g)


def empirical_moments(sample: Sample, order: int) -> MomentVector:
    """Sample moments m_k = mean(X_i^k), k = 0..order, on the rescaled data."""
    if order < 1:
        raise ValueError("moment order must be at least 1")
    x = sample.rescaled()
    powers = x[None, :] ** np.arange(order + 1)[:, None]
    return MomentVector(powers.mean(axis=1))


def binomial_table(order: int) -> np.ndarray:
    """Lower-triangular table of C(k, j), k, j = 0..order, in floating point.

    Built by the multiplicative recurrence C(k, j) = C(k, j-1) (k-j+1)/j,
    which stays exact far beyond the 64-bit integer range that C(50, 25)
    would overflow.
    """
    c = np.zeros((order + 1, order + 1))
    c[:, 0] = 1.0
    for k in range(1, order + 1):
        for j in range(1, k + 1):
            c[k, j] = c[k, j - 1] * (k - j + 1) / j
    return c


def transfer_matrix(family: MapFamily, g: MomentVector) -> np.ndarray:
    """Moment-transfer matrix A with rows k = 1..M and one column per map.

    On the canonical support every entry lies in [0, 1].  The binomial
    series terminates at j = k, so the truncation order of ``g`` bounds all
    sums exactly.
    """
    order = g.order
    a = family.intercepts
    b = family.slopes
    ja = np.arange(order + 1)
    pow_a = a[None, :] ** ja[:, None]  # pow_a[r, i] = a_i**r
    pow_b = b[None, :] ** ja[:, None]
    comb = binomial_table(order)

    out = np.empty((order, len(family)))
    for k in range(1, order + 1):
        coeff = comb[k, : k + 1] * g.g[: k + 1]
        out[k - 1] = coeff @ (pow_b[: k + 1] * pow_a[k::-1])
    return out


def push_forward_moments(A: np.ndarray, p: np.ndarray) -> MomentVector:
    """Moments of the pushed-forward measure: h_0 = 1, h_k = (A p)_k."""
    p = np.asarray(p, dtype=float)
    if A.shape[1] != p.size:
        raise ValueError("transfer matrix and probability vector sizes disagree")
    return MomentVector(np.concatenate([[1.0], A @ p]))

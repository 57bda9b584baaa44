"""Reference estimators and distribution oracles.

Everything the fitting pipeline is compared against lives here: the empirical
distribution function, order-statistic quantiles, a Gaussian kernel density,
and an exact Beta CDF / sampler pair used as ground truth by the Monte Carlo
harness.  Functions accept plain float arrays (or any object with a
``values`` attribute) and are safe to call concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateSampleError
from .rng import RandomStream

__all__ = [
    "BetaParams",
    "edf",
    "empirical_quantile",
    "beta_cdf",
    "beta_raw_moment",
    "beta_sample",
    "kernel_density",
    "ks_statistic",
]

_CF_MAX_ITER = 300
_CF_EPS = 1e-15
_CF_FPMIN = 1e-300


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a Beta distribution on [0, 1]."""

    shape_a: float
    shape_b: float

    def __post_init__(self):
        if not (self.shape_a > 0 and self.shape_b > 0):
            raise ValueError("beta shape parameters must be strictly positive")

    @property
    def label(self) -> str:
        return f"beta({self.shape_a:g},{self.shape_b:g})"


def _values(sample) -> np.ndarray:
    """Unwrap a Sample-like object (anything with .values) or an array."""
    return np.asarray(getattr(sample, "values", sample), dtype=float)


def edf(sample, x):
    """Empirical distribution function: fraction of observations <= x.

    Right-continuous step function; vectorized in ``x``.
    """
    v = np.sort(_values(sample))
    ranks = np.searchsorted(v, np.asarray(x, dtype=float), side="right")
    out = ranks / v.size
    return float(out) if np.isscalar(x) else out

def empirical_quantile(sample, u):
    """Order-statistic quantile with linear interpolation.

    For sorted values x_(1)..x_(n) and probability u, the plotting position
    is h = 1 + u (n - 1) and the result interpolates between x_(floor h) and
    the next order statistic.  u = 0 gives the minimum, u = 1 the maximum.
    """
    v = np.sort(_values(sample))
    n = v.size
    if n == 0:
        raise ValueError("cannot take quantiles of an empty sample")
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0.0) | (u_arr > 1.0)):
        raise ValueError("quantile probabilities must lie in [0, 1]")
    h = 1.0 + u_arr * (n - 1)
    lo = np.minimum(np.floor(h).astype(int), n) - 1
    hi = np.minimum(lo + 1, n - 1)
    frac = h - np.floor(h)
    out = v[lo] + frac * (v[hi] - v[lo])
    return float(out) if np.isscalar(u) else out


def _betacf(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Continued fraction for the incomplete beta, modified Lentz scheme.

    Vectorized over x; iterates until every entry's increment is below
    machine-level tolerance.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    np.copyto(d, _CF_FPMIN, where=np.abs(d) < _CF_FPMIN)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        np.copyto(d, _CF_FPMIN, where=np.abs(d) < _CF_FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _CF_FPMIN, where=np.abs(c) < _CF_FPMIN)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        np.copyto(d, _CF_FPMIN, where=np.abs(d) < _CF_FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _CF_FPMIN, where=np.abs(c) < _CF_FPMIN)
        d = 1.0 / d
        delta = d * c
        h *= delta
        if np.all(np.abs(delta - 1.0) < _CF_EPS):
            return h
    raise RuntimeError(
        f"incomplete beta continued fraction failed to converge for a={a}, b={b}"
    )


def beta_cdf(params: BetaParams, x, strict: bool = True):
    """Regularized incomplete beta I_x(a, b), the Beta CDF oracle.

    Evaluates the continued fraction on whichever tail converges fast and
    uses the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) for the other.  Arguments
    outside [0, 1] raise when ``strict`` and are clamped (with a warning)
    otherwise.  Vectorized in ``x``; absolute accuracy ~1e-14.
    """
    a, b = params.shape_a, params.shape_b
    x_arr = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    outside = (x_arr < 0.0) | (x_arr > 1.0)
    if np.any(outside):
        if strict:
            raise ValueError("beta_cdf argument outside [0, 1]")
        warnings.warn("beta_cdf argument clamped to [0, 1]", stacklevel=2)
        x_arr = np.clip(x_arr, 0.0, 1.0)

    out = np.empty_like(x_arr)
    at_zero = x_arr == 0.0
    at_one = x_arr == 1.0
    out[at_zero] = 0.0
    out[at_one] = 1.0

    interior = ~(at_zero | at_one)
    if np.any(interior):
        xi = x_arr[interior]
        log_bt = (
            gammaln(a + b)
            - gammaln(a)
            - gammaln(b)
            + a * np.log(xi)
            + b * np.log1p(-xi)
        )
        bt = np.exp(log_bt)
        res = np.empty_like(xi)
        direct = xi < (a + 1.0) / (a + b + 2.0)
        if np.any(direct):
            res[direct] = bt[direct] * _betacf(a, b, xi[direct]) / a
        flip = ~direct
        if np.any(flip):
            res[flip] = 1.0 - bt[flip] * _betacf(b, a, 1.0 - xi[flip]) / b
        out[interior] = res

    return float(out[0]) if np.isscalar(x) else out


def beta_pdf(params: BetaParams, x):
    """Beta density x^(a-1) (1-x)^(b-1) / B(a, b), zero outside (0, 1)."""
    a, b = params.shape_a, params.shape_b
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x_arr)
    inside = (x_arr > 0.0) & (x_arr < 1.0)
    if np.any(inside):
        xi = x_arr[inside]
        log_norm = gammaln(a + b) - gammaln(a) - gammaln(b)
        out[inside] = np.exp(log_norm + (a - 1.0) * np.log(xi) + (b - 1.0) * np.log1p(-xi))
    return float(out[0]) if np.isscalar(x) else out


def beta_raw_moment(params: BetaParams, k: int) -> float:
    """E[X^k] for X ~ Beta(a, b): the product of (a+r)/(a+b+r), r < k."""
    a, b = params.shape_a, params.shape_b
    out = 1.0
    for r in range(k):
        out *= (a + r) / (a + b + r)
    return out


def beta_sample(params: BetaParams, n: int, rng: RandomStream | int) -> np.ndarray:
    """Draw ``n`` i.i.d. Beta variates, deterministic for a fixed seed.

    ``rng`` is a RandomStream or an integer seed.  Values lie in [0, 1]; the
    natural declared support for downstream fitting is the unit interval.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    stream = rng if isinstance(rng, RandomStream) else RandomStream(rng)
    return stream.betas(params.shape_a, params.shape_b, n)


def kernel_density(sample, x):
    """Gaussian kernel density with Silverman's rule-of-thumb bandwidth.

    Bandwidth 0.9 * min(sd, IQR/1.34) * n**(-1/5); falls back to the sample
    standard deviation when the IQR collapses to zero.  Vectorized in ``x``.
    """
    v = _values(sample)
    n = v.size
    if n < 2:
        raise ValueError("kernel density needs at least 2 observations")
    sd = float(np.std(v, ddof=1))
    if sd == 0.0:
        raise DegenerateSampleError("kernel density bandwidth is zero (no spread)")
    iqr = float(empirical_quantile(v, 0.75) - empirical_quantile(v, 0.25))
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    bw = 0.9 * spread * n ** (-0.2)
    z = (np.subtract.outer(np.asarray(x, dtype=float), v)) / bw
    dens = np.exp(-0.5 * z * z).mean(axis=-1) / (bw * np.sqrt(2.0 * np.pi))
    return float(dens) if np.isscalar(x) else dens


def ks_statistic(sample, cdf) -> float:
    """Kolmogorov-Smirnov distance between a sample and a CDF callable."""
    v = np.sort(_values(sample))
    n = v.size
    f = np.asarray(cdf(v), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))

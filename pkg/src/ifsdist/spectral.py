"""Characteristic function of the IFS fixed point and Fourier density.

The transform of the invariant measure satisfies

    phi(t) = sum_k p_k exp(-i t a_k) phi(b_k t),

and because every |b_k| < 1 the relation can be iterated on a symmetric
t-grid: each sweep reads phi at the contracted arguments b_k t by linear
interpolation, so a sweep costs N * grid points and the error contracts
geometrically toward zero away from t = 0, where the value is pinned to 1.

When the target law has a density on [0, 1] (a subset of one 2*pi period),
the Fourier coefficients are B_k = phi(k) and the density estimate is the
real-form partial sum

    f(x) = 1/(2 pi) + (1/pi) sum_{k=1}^{m} Re(B_k) cos(kx) - Im(B_k) sin(kx),

with m picked by the usual rule: stop at the first m whose next two
coefficients both fall below 2/(n + 1) in squared modulus.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .operator import IfsModel

__all__ = [
    "CharFnEstimate",
    "FourierDensity",
    "char_fn_fixed_point",
    "select_num_terms",
    "density_estimate",
    "evaluate_density",
    "fit_density",
    "export_char_fn_csv",
    "export_density_csv",
]

DEFAULT_CHAR_GRID = 4097
DEFAULT_MAX_SWEEPS = 60
DEFAULT_CHAR_TOL = 1e-10
DEFAULT_MAX_TERMS = 25

_MODULUS_SLACK = 1e-8
_HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class CharFnEstimate:
    """Characteristic function sampled on a symmetric grid around 0."""

    t_grid: np.ndarray
    values: np.ndarray
    iterations_used: int
    converged: bool

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        center = t.size // 2
        if t[center] != 0.0 or v[center] != 1.0:
            raise ValueError("the grid must contain t = 0 with value exactly 1")
        if np.max(np.abs(v)) > 1.0 + _MODULUS_SLACK:
            raise ValueError("characteristic function modulus exceeds 1")
        if np.max(np.abs(v - np.conj(v[::-1]))) > _HERMITIAN_TOL:
            raise ValueError("characteristic function is not Hermitian-symmetric")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    def at(self, t):
        """Linear interpolation of the estimate; |t| must stay on the grid."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(np.abs(t_arr) > self.t_max):
            raise ValueError("argument outside the evaluated frequency range")
        re = np.interp(t_arr, self.t_grid, self.values.real)
        im = np.interp(t_arr, self.t_grid, self.values.imag)
        return re + 1j * im


def _symmetric_grid(t_max: float, grid_points: int) -> np.ndarray:
    """Odd-length grid over [-t_max, t_max], bitwise symmetric, 0 exact."""
    if grid_points % 2 == 0:
        grid_points += 1
    half = grid_points // 2
    return (np.arange(grid_points) - half) * (t_max / half)


def char_fn_fixed_point(
    model: IfsModel,
    t_max: float,
    grid_points: int = DEFAULT_CHAR_GRID,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    tol: float = DEFAULT_CHAR_TOL,
) -> CharFnEstimate:
    """Iterate the transform fixed-point relation on a frequency grid.

    Starts from phi = 1 everywhere and sweeps until the sup change drops
    below ``tol``.  Even grid sizes are bumped to the next odd count so that
    t = 0 is a node (the value there is pinned to exactly 1 every sweep).
    Non-convergence within ``max_sweeps`` flags the estimate rather than
    raising: the iteration is a contraction, so running out of sweeps means
    the grid resolution, not the model, is the limit.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    t = _symmetric_grid(t_max, grid_points)
    center = t.size // 2
    a = model.family.intercepts
    b = model.family.slopes
    p = model.p
    phases = np.exp(-1j * np.outer(a, t))  # phases[k] = exp(-i t a_k)

    phi = np.ones(t.size, dtype=complex)
    converged = False
    sweeps_done = 0
    for sweep in range(1, max_sweeps + 1):
        nxt = np.zeros(t.size, dtype=complex)
        for k in range(a.size):
            arg = b[k] * t
            vals = np.interp(arg, t, phi.real) + 1j * np.interp(arg, t, phi.imag)
            nxt += p[k] * phases[k] * vals
        nxt[center] = 1.0
        delta = float(np.max(np.abs(nxt - phi)))
        phi = nxt
        sweeps_done = sweep
        if delta < tol:
            converged = True
            break
    return CharFnEstimate(t_grid=t, values=phi, iterations_used=sweeps_done, converged=converged)


def select_num_terms(coefficients, n: int) -> int:
    """Smallest m with |B_{m+1}|^2 and |B_{m+2}|^2 both below 2/(n + 1).

    ``coefficients`` is the sequence B_0..B_max.  When no m qualifies the
    rule falls back to the largest usable truncation, max - 2.
    """
    c = np.asarray(coefficients, dtype=complex)
    if c.size < 3:
        raise ValueError("need coefficients at least two places past a candidate m")
    threshold = 2.0 / (n + 1)
    power = np.abs(c) ** 2
    m_max = c.size - 1
    for m in range(0, m_max - 1):
        if power[m + 1] < threshold and power[m + 2] < threshold:
            return m
    return m_max - 2


@dataclass(frozen=True)
class FourierDensity:
    """Truncated Fourier density: coefficients B_0..B_max and the cut m."""

    coefficients: np.ndarray
    m: int
    sample_size: int
    truncation_warning: bool = False

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c[0] != 1.0:
            raise ValueError("B_0 must equal 1")
        if not 0 <= self.m <= c.size - 1:
            raise ValueError("selected term count exceeds the stored coefficients")
        object.__setattr__(self, "coefficients", c)

    def __call__(self, x, clamp_negative: bool = False):
        return density_estimate(self, x, clamp_negative=clamp_negative)


def density_estimate(fd: FourierDensity, x, clamp_negative: bool = False):
    """Real-form Fourier partial sum at canonical-support points.

    Truncation can push the value below zero; by default that is reported
    as-is, since clamping would silently break the integrate-to-one identity
    over the full period.  ``clamp_negative`` floors at 0 for presentation.
    """
    x_arr = np.asarray(x, dtype=float)
    out = np.full_like(x_arr, 1.0 / (2.0 * np.pi), dtype=float)
    for k in range(1, fd.m + 1):
        bk = fd.coefficients[k]
        out = out + (bk.real * np.cos(k * x_arr) - bk.imag * np.sin(k * x_arr)) / np.pi
    if clamp_negative:
        out = np.maximum(out, 0.0)
    return float(out) if np.isscalar(x) else out


def fit_density(
    model: IfsModel,
    sample_size: int,
    max_terms: int = DEFAULT_MAX_TERMS,
    grid_points: int = DEFAULT_CHAR_GRID,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    tol: float = DEFAULT_CHAR_TOL,
) -> FourierDensity:
    """Fourier density of a fitted model: B_k = phi(k), data-driven cut.

    The characteristic function is evaluated out to max_terms + 2 so the
    term-selection rule can always look two coefficients past any candidate.
    The warning flag is set when either the transform iteration or the
    selection rule hit their fallbacks.
    """
    if max_terms < 2:
        raise ValueError("max_terms must be at least 2")
    cf = char_fn_fixed_point(
        model, t_max=max_terms + 2, grid_points=grid_points, max_sweeps=max_sweeps, tol=tol
    )
    coeffs = cf.at(np.arange(max_terms + 1, dtype=float))
    coeffs[0] = 1.0
    m = select_num_terms(coeffs, sample_size)
    threshold = 2.0 / (sample_size + 1)
    rule_matched = (
        m + 2 <= max_terms
        and abs(coeffs[m + 1]) ** 2 < threshold
        and abs(coeffs[m + 2]) ** 2 < threshold
    )
    return FourierDensity(
        coefficients=coeffs,
        m=m,
        sample_size=sample_size,
        truncation_warning=(not cf.converged) or not rule_matched,
    )


def evaluate_density(model: IfsModel, fd: FourierDensity, x, clamp_negative: bool = False):
    """Density on the original support (canonical density over the width)."""
    u = model.support.to_unit(x)
    return density_estimate(fd, u, clamp_negative=clamp_negative) / model.support.width


def export_char_fn_csv(path, cf: CharFnEstimate) -> None:
    """Rows (t, re, im) for the whole evaluated grid."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "re", "im"])
        for t, v in zip(cf.t_grid, cf.values):
            writer.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag))])


def export_density_csv(path, xs, values) -> None:
    """Rows (x, value) of a density curve."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value"])
        for x, v in zip(np.asarray(xs, dtype=float), np.asarray(values, dtype=float)):
            writer.writerow([repr(float(x)), repr(float(v))])

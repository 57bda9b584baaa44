"""The Markov operator on distribution functions and its fixed point.

An estimated model is a map family with probabilities; applying

    TF(x) = sum_i p_i F(w_i^{-1}(x)),   TF = 0 left of the support, 1 right,

contracts toward the model's invariant CDF.  CDFs are carried on an
equispaced grid over the canonical [0, 1] support with linear interpolation
in between, which keeps one application of T at O(N * grid) and makes the
iteration cheap enough that the default five sweeps are instant.

Zero-slope maps (point masses, e.g. surviving from merged quantile
intervals) contribute the unit step at their intercept, the b -> 0 limit of
F((x - a) / b).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ModelFormatError
from .maps import AffineMap, MapFamily, MapKind, SupportInterval

__all__ = [
    "DEFAULT_GRID_SIZE",
    "DEFAULT_ITERATIONS",
    "PiecewiseCdf",
    "IfsModel",
    "apply_T",
    "fixed_point_cdf",
    "evaluate_cdf",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]

DEFAULT_GRID_SIZE = 512
DEFAULT_ITERATIONS = 5

_SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class PiecewiseCdf:
    """A monotone grid-sampled CDF on [0, 1], linearly interpolated.

    ``values[j]`` is the CDF at j / (len - 1); the first and last values are
    pinned to exactly 0 and 1.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("grid CDF needs at least two nodes")
        if v[0] != 0.0 or v[-1] != 1.0:
            raise ValueError("grid CDF must start at 0 and end at 1")
        if np.any(np.diff(v) < 0.0) or np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError("grid CDF must be non-decreasing within [0, 1]")
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.values.size)

    @classmethod
    def uniform(cls, grid_size: int = DEFAULT_GRID_SIZE) -> "PiecewiseCdf":
        """The uniform CDF on [0, 1], the usual iteration starting point."""
        return cls(np.linspace(0.0, 1.0, grid_size + 1))

    def __call__(self, u):
        """Interpolated CDF value; 0 below the support, 1 above."""
        return np.interp(np.asarray(u, dtype=float), self.grid, self.values, left=0.0, right=1.0)


@dataclass(frozen=True)
class IfsModel:
    """A fitted IFS: map family, probability vector, and the original support."""

    family: MapFamily
    p: np.ndarray
    support: SupportInterval

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.size != len(self.family):
            raise ValueError("probability vector length must match the family")
        if np.any(p < 0.0) or np.any(p > 1.0) or abs(p.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError("probabilities must lie in [0, 1] and sum to 1")
        object.__setattr__(self, "p", p)

    @property
    def contractivity(self) -> float:
        return self.family.contractivity


def apply_T(model: IfsModel, F: PiecewiseCdf) -> PiecewiseCdf:
    """One application of the distribution-function operator on the grid.

    F is extended by 0 below the unit support and 1 above before composing
    with the map preimages; endpoints of the result are forced to exactly
    0 and 1 and a running max removes ulp-scale interpolation dips so the
    result is again a valid grid CDF.
    """
    x = F.grid
    out = np.zeros_like(x)
    for m, weight in zip(model.family, model.p):
        if m.b == 0.0:
            out += weight * (x >= m.a)
        else:
            pre = (x - m.a) / m.b
            out += weight * np.interp(pre, x, F.values, left=0.0, right=1.0)
    out[0] = 0.0
    out[-1] = 1.0
    out = np.maximum.accumulate(np.clip(out, 0.0, 1.0))
    return PiecewiseCdf(out)


def fixed_point_cdf(
    model: IfsModel,
    iterations: int = DEFAULT_ITERATIONS,
    grid_size: int = DEFAULT_GRID_SIZE,
    return_deltas: bool = False,
):
    """Iterate T from the uniform CDF and return the final iterate.

    A handful of sweeps suffices because T contracts geometrically at the
    family's contractivity factor.  With ``return_deltas`` the sup-norm
    distances between successive iterates come back too, as a convergence
    diagnostic.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    current = PiecewiseCdf.uniform(grid_size)
    deltas = np.empty(iterations)
    for sweep in range(iterations):
        nxt = apply_T(model, current)
        deltas[sweep] = np.max(np.abs(nxt.values - current.values))
        current = nxt
    if return_deltas:
        return current, deltas
    return current


def evaluate_cdf(model: IfsModel, cdf: PiecewiseCdf, x):
    """CDF estimate at points of the original support.

    Rescales to the unit interval and interpolates; anything left of the
    support evaluates to 0, anything right of it to 1.
    """
    return cdf(model.support.to_unit(x))


def model_to_dict(model: IfsModel) -> dict:
    """JSON-ready representation: support, kind, map coefficients, weights."""
    return {
        "support": [model.support.alpha, model.support.beta],
        "kind": model.family.kind.value,
        "maps": [[m.a, m.b] for m in model.family],
        "p": model.p.tolist(),
    }


def model_from_dict(payload: dict) -> IfsModel:
    """Inverse of :func:`model_to_dict`; raises ModelFormatError on bad input."""
    try:
        alpha, beta = payload["support"]
        kind = MapKind(payload["kind"])
        maps = tuple(AffineMap(a=float(a), b=float(b)) for a, b in payload["maps"])
        p = np.asarray(payload["p"], dtype=float)
        family = MapFamily(maps, kind=kind)
        return IfsModel(family=family, p=p, support=SupportInterval(float(alpha), float(beta)))
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"invalid model payload: {exc}") from exc


def save_model(model: IfsModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


def load_model(path) -> IfsModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError("model file must hold a JSON object")
    return model_from_dict(payload)

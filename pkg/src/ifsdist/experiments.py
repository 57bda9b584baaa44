"""Monte Carlo relative-efficiency harness and the window-censoring demo.

The benchmark draws repeated Beta samples, fits the requested map families,
and reports the mean ratio (in percent) of each IFS estimator's error metric
to the empirical distribution function's on the same samples, measured
against the analytic Beta CDF.  Two metrics are tracked: the average mean
square error over an interior evaluation grid and the sup-norm distance on
the same grid.

The missing-data experiment censors a Beta(2,2) sample down to a few
observation windows, fits the dyadic family on what survives (with the full
known support declared), and compares how the moment-based fit and the EDF
cope with the unobserved regions.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .baselines import BetaParams, beta_cdf, beta_pdf, beta_sample, edf, kernel_density
from .errors import BenchmarkError, IfsdistError, NoDataError
from .inverse import SolverConfig, SolverReport, assemble_quadratic_problem, solve_box_constrained
from .maps import (
    MapKind,
    SupportInterval,
    UNIT_SUPPORT,
    build_dyadic_maps,
    build_harmonic_maps,
    build_quantile_maps,
)
from .moments import DEFAULT_MOMENT_ORDER, Sample, empirical_moments, transfer_matrix
from .operator import DEFAULT_GRID_SIZE, DEFAULT_ITERATIONS, IfsModel, evaluate_cdf, fixed_point_cdf
from .rng import DEFAULT_SEED, RandomStream
from .spectral import evaluate_density, fit_density

__all__ = [
    "DEFAULT_CENSOR_WINDOWS",
    "DEFAULT_W1_LEVELS",
    "DEFAULT_W2_MAX_DENOMINATOR",
    "FIT_SOLVER_CONFIG",
    "metric_grid",
    "amse",
    "sup_distance",
    "CensorWindows",
    "apply_window_censoring",
    "fit_ifs",
    "BenchmarkConfig",
    "EfficiencyRow",
    "run_benchmark",
    "write_benchmark_csv",
    "MissingDataReport",
    "run_missing_data_experiment",
]

DEFAULT_W1_LEVELS = 5  # 62 dyadic maps
DEFAULT_W2_MAX_DENOMINATOR = 8  # 28 harmonic maps
DEFAULT_EVAL_GRID = 512

FIT_SOLVER_CONFIG = SolverConfig(tol_grad=1e-5, max_iter=100, tol_objective=2.2e-9)
"""Solver settings used when fitting estimators to data.

The truncated problem is rank-deficient (rank Q <= M < N), so its minimizer
set is a whole polytope; running the quasi-Newton iteration to machine
tolerance walks far from the uniform start toward an arbitrary lumpy vertex
of that set.  Stopping early keeps the weights near uniform among
near-minimizers, which acts as regularization and measurably improves every
estimator comparison in this module.  The thresholds are the classic
defaults of widely deployed L-BFGS-B wrappers (factr 1e7, loose pgtol,
100 iterations).
"""

_FAILURE_CAP = 0.05
_MIN_RETAINED = 20


def metric_grid(support: SupportInterval, grid_size: int) -> np.ndarray:
    """Equispaced interior evaluation points (endpoints excluded).

    Endpoint agreement of CDF estimators is forced by construction, so
    including the endpoints would only dilute the error metrics.
    """
    steps = np.arange(1, grid_size + 1) / (grid_size + 1)
    return support.alpha + support.width * steps


def amse(estimate, truth, grid_size: int = DEFAULT_EVAL_GRID, support: SupportInterval = UNIT_SUPPORT) -> float:
    """Average squared CDF error over the interior grid."""
    x = metric_grid(support, grid_size)
    diff = np.asarray(estimate(x), dtype=float) - np.asarray(truth(x), dtype=float)
    return float(np.mean(diff**2))


def sup_distance(estimate, truth, grid_size: int = DEFAULT_EVAL_GRID, support: SupportInterval = UNIT_SUPPORT) -> float:
    """Largest absolute CDF error over the interior grid."""
    x = metric_grid(support, grid_size)
    diff = np.asarray(estimate(x), dtype=float) - np.asarray(truth(x), dtype=float)
    return float(np.max(np.abs(diff)))


@dataclass(frozen=True)
class CensorWindows:
    """Disjoint open observation windows inside a support."""

    windows: tuple[tuple[float, float], ...]

    def __post_init__(self):
        wins = tuple((float(lo), float(hi)) for lo, hi in self.windows)
        if not wins:
            raise ValueError("need at least one window")
        for lo, hi in wins:
            if not lo < hi:
                raise ValueError("each window must be a nonempty open interval")
        ordered = sorted(wins)
        for (lo1, hi1), (lo2, hi2) in zip(ordered, ordered[1:]):
            if hi1 > lo2:
                raise ValueError("windows must be disjoint")
        object.__setattr__(self, "windows", wins)

    def contains(self, x) -> np.ndarray:
        x_arr = np.asarray(x, dtype=float)
        mask = np.zeros(x_arr.shape, dtype=bool)
        for lo, hi in self.windows:
            mask |= (x_arr > lo) & (x_arr < hi)
        return mask

    def gaps(self, support: SupportInterval) -> tuple[tuple[float, float], ...]:
        """The unobserved complement intervals inside the support."""
        edges = [support.alpha]
        for lo, hi in sorted(self.windows):
            edges.extend([lo, hi])
        edges.append(support.beta)
        out = []
        for lo, hi in zip(edges[::2], edges[1::2]):
            if hi > lo:
                out.append((lo, hi))
        return tuple(out)


DEFAULT_CENSOR_WINDOWS = CensorWindows(((0.1, 0.15), (0.37, 0.43), (0.7, 0.8)))


def apply_window_censoring(sample: Sample, windows: CensorWindows) -> Sample:
    """Keep only the observations falling inside some window.

    The declared support is left untouched: the analyst still knows the true
    support even when the instrument cannot observe parts of it.
    """
    keep = windows.contains(sample.values)
    if not np.any(keep):
        raise NoDataError("window censoring removed every observation")
    return Sample(values=sample.values[keep], support=sample.support)


def fit_ifs(
    sample: Sample,
    kind: MapKind,
    *,
    w1_levels: int = DEFAULT_W1_LEVELS,
    w2_max_denominator: int = DEFAULT_W2_MAX_DENOMINATOR,
    num_quantiles: int | None = None,
    moment_order: int = DEFAULT_MOMENT_ORDER,
    solver_config: SolverConfig | None = None,
    return_report: bool = False,
):
    """Fit one IFS model of the requested family to a sample.

    Quantile families use n/2 intervals by default.  Q1 fixes uniform
    per-interval probabilities (reweighted by merge counts), which needs no
    optimization; every other family solves the penalized moment-matching
    problem on the sample moments, by default with FIT_SOLVER_CONFIG.  With
    ``return_report`` the solver report (or None for Q1) comes back
    alongside the model.
    """
    kind = MapKind(kind)
    unit_values = sample.rescaled()
    if kind is MapKind.W1:
        family = build_dyadic_maps(w1_levels)
    elif kind is MapKind.W2:
        family = build_harmonic_maps(w2_max_denominator)
    else:
        n_q = num_quantiles if num_quantiles is not None else max(1, sample.n // 2)
        family = build_quantile_maps(unit_values, n_q, kind=kind)

    report: SolverReport | None = None
    if kind is MapKind.Q1:
        n_q = sum(family.merge_counts)
        p = np.asarray(family.merge_counts, dtype=float) / n_q
    else:
        g = empirical_moments(sample, moment_order)
        A = transfer_matrix(family, g)
        qp = assemble_quadratic_problem(A, g)
        report = solve_box_constrained(qp, solver_config or FIT_SOLVER_CONFIG)
        p = report.solution

    model = IfsModel(family=family, p=p, support=sample.support)
    if return_report:
        return model, report
    return model


@dataclass(frozen=True)
class BenchmarkConfig:
    """Full description of one relative-efficiency run."""

    distributions: tuple[BetaParams, ...] = (BetaParams(2, 2), BetaParams(1, 1))
    sample_sizes: tuple[int, ...] = (10, 250)
    replications: int = 100
    families: tuple[MapKind, ...] = (MapKind.W1, MapKind.Q1)
    w1_levels: int = DEFAULT_W1_LEVELS
    w2_max_denominator: int = DEFAULT_W2_MAX_DENOMINATOR
    moment_order: int = DEFAULT_MOMENT_ORDER
    seed: int = DEFAULT_SEED
    eval_grid_size: int = DEFAULT_EVAL_GRID
    cdf_grid_size: int = DEFAULT_GRID_SIZE
    iterations: int = DEFAULT_ITERATIONS

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if any(n < 2 for n in self.sample_sizes):
            raise ValueError("sample sizes must be at least 2")
        object.__setattr__(self, "distributions", tuple(self.distributions))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "families", tuple(MapKind(f) for f in self.families))


@dataclass(frozen=True)
class EfficiencyRow:
    """Mean IFS/EDF error ratio for one (distribution, n, family, metric)."""

    distribution: str
    n: int
    family: str
    metric: str
    ratio_percent: float
    failures: int


def _replication_ratios(
    config: BenchmarkConfig, params: BetaParams, n: int, stream: RandomStream
) -> dict[MapKind, tuple[float, float] | None]:
    """One replication: per-family (AMSE ratio, SUP ratio) or None on failure."""
    values = beta_sample(params, n, stream)
    sample = Sample(values=values, support=UNIT_SUPPORT)
    grid = metric_grid(UNIT_SUPPORT, config.eval_grid_size)
    truth = beta_cdf(params, grid)
    edf_err = edf(values, grid) - truth
    edf_amse = float(np.mean(edf_err**2))
    edf_sup = float(np.max(np.abs(edf_err)))

    out: dict[MapKind, tuple[float, float] | None] = {}
    for kind in config.families:
        try:
            model = fit_ifs(
                sample,
                kind,
                w1_levels=config.w1_levels,
                w2_max_denominator=config.w2_max_denominator,
                moment_order=config.moment_order,
            )
            cdf = fixed_point_cdf(model, config.iterations, config.cdf_grid_size)
            ifs_err = evaluate_cdf(model, cdf, grid) - truth
            out[kind] = (
                100.0 * float(np.mean(ifs_err**2)) / edf_amse,
                100.0 * float(np.max(np.abs(ifs_err))) / edf_sup,
            )
        except IfsdistError:
            out[kind] = None
    return out


def run_benchmark(config: BenchmarkConfig | None = None) -> list[EfficiencyRow]:
    """Run the full Monte Carlo comparison described by ``config``.

    Per-replication RNG streams are spawned from the master seed by global
    replication index, so output is bit-identical no matter how replications
    are scheduled.  Failed replications (degenerate samples, solver
    breakdowns) are excluded and counted; more than 5% failures for any cell
    aborts with a BenchmarkError since silent exclusion would bias ratios.
    """
    config = config or BenchmarkConfig()
    master = RandomStream(config.seed)
    rows: list[EfficiencyRow] = []
    cell_index = 0
    for params in config.distributions:
        for n in config.sample_sizes:
            sums = {kind: np.zeros(2) for kind in config.families}
            counts = {kind: 0 for kind in config.families}
            for rep in range(config.replications):
                stream = master.spawn(cell_index * config.replications + rep)
                ratios = _replication_ratios(config, params, n, stream)
                for kind, pair in ratios.items():
                    if pair is not None:
                        sums[kind] += pair
                        counts[kind] += 1
            cell_index += 1
            for kind in config.families:
                failures = config.replications - counts[kind]
                if failures > _FAILURE_CAP * config.replications:
                    raise BenchmarkError(
                        f"{failures}/{config.replications} replications failed for "
                        f"{params.label}, n={n}, family={kind.value}"
                    )
                mean_ratios = sums[kind] / max(counts[kind], 1)
                for metric, value in zip(("amse", "sup"), mean_ratios):
                    rows.append(
                        EfficiencyRow(
                            distribution=params.label,
                            n=n,
                            family=kind.value,
                            metric=metric,
                            ratio_percent=float(value),
                            failures=failures,
                        )
                    )
    return rows


def write_benchmark_csv(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["distribution", "n", "family", "metric", "ratio_percent", "failures"])
        for row in rows:
            writer.writerow(
                [row.distribution, row.n, row.family, row.metric, repr(row.ratio_percent), row.failures]
            )


@dataclass(frozen=True)
class MissingDataReport:
    """Outcome of the window-censoring demonstration."""

    n_total: int
    n_retained: int
    amse_ratio_percent: float
    sup_ratio_percent: float
    files: tuple[str, ...] = field(default=())


def run_missing_data_experiment(
    n: int = 400,
    seed: int = DEFAULT_SEED,
    windows: CensorWindows = DEFAULT_CENSOR_WINDOWS,
    out_dir: str | None = None,
    *,
    w1_levels: int = DEFAULT_W1_LEVELS,
    moment_order: int = DEFAULT_MOMENT_ORDER,
    eval_grid_size: int = DEFAULT_EVAL_GRID,
    max_terms: int = 25,
) -> MissingDataReport:
    """Window-censored Beta(2,2) demonstration.

    Draws n observations, keeps only those inside the windows, fits the
    dyadic family on the survivors with the full [0, 1] support declared,
    and reports IFS/EDF error ratios against the true CDF.  The EDF here is
    the EDF of the censored sample: the estimator an analyst who ignored the
    censoring would use.  With ``out_dir`` set, CDF and density curves plus
    a ratio summary are written as CSV files.
    """
    params = BetaParams(2, 2)
    values = beta_sample(params, n, RandomStream(seed))
    full = Sample(values=values, support=UNIT_SUPPORT)
    censored = apply_window_censoring(full, windows)
    if censored.n < _MIN_RETAINED:
        raise NoDataError(
            f"only {censored.n} observations survive censoring; need {_MIN_RETAINED}"
        )

    model = fit_ifs(censored, MapKind.W1, w1_levels=w1_levels, moment_order=moment_order)
    cdf = fixed_point_cdf(model)

    grid = metric_grid(UNIT_SUPPORT, eval_grid_size)
    truth = beta_cdf(params, grid)
    ifs_err = evaluate_cdf(model, cdf, grid) - truth
    edf_err = edf(censored.values, grid) - truth
    amse_ratio = 100.0 * float(np.mean(ifs_err**2) / np.mean(edf_err**2))
    sup_ratio = 100.0 * float(np.max(np.abs(ifs_err)) / np.max(np.abs(edf_err)))

    files: list[str] = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        fd = fit_density(model, censored.n, max_terms=max_terms)
        cdf_path = os.path.join(out_dir, "curves_cdf.csv")
        with open(cdf_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "true_cdf", "edf", "ifs_cdf"])
            ifs_vals = evaluate_cdf(model, cdf, grid)
            edf_vals = edf(censored.values, grid)
            for row in zip(grid, truth, edf_vals, ifs_vals):
                writer.writerow([repr(float(v)) for v in row])
        files.append(cdf_path)

        pdf_path = os.path.join(out_dir, "curves_density.csv")
        with open(pdf_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "true_pdf", "kernel", "ifs_pdf"])
            kern = kernel_density(censored.values, grid)
            ifs_pdf = evaluate_density(model, fd, grid)
            for row in zip(grid, beta_pdf(params, grid), kern, ifs_pdf):
                writer.writerow([repr(float(v)) for v in row])
        files.append(pdf_path)

        ratio_path = os.path.join(out_dir, "ratios.csv")
        with open(ratio_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "ratio_percent"])
            writer.writerow(["amse", repr(amse_ratio)])
            writer.writerow(["sup", repr(sup_ratio)])
        files.append(ratio_path)

    return MissingDataReport(
        n_total=n,
        n_retained=censored.n,
        amse_ratio_percent=amse_ratio,
        sup_ratio_percent=sup_ratio,
        files=tuple(files),
    )

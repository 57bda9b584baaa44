"""Nonparametric distribution and density estimation via iterated function systems.

Fit a family of affine contraction maps to an i.i.d. sample on a known
compact support by matching sample moments through a penalized quadratic
program, then read the estimated distribution function off the fixed point
of the associated operator.  A Fourier expansion of the fixed point's
characteristic function gives a density estimate on the side, and a Monte
Carlo harness compares everything against the empirical distribution
function.
"""

from .baselines import (
    BetaParams,
    beta_cdf,
    beta_pdf,
    beta_raw_moment,
    beta_sample,
    edf,
    empirical_quantile,
    kernel_density,
    ks_statistic,
)
from .errors import (
    BenchmarkError,
    DegenerateSampleError,
    IfsdistError,
    ModelFormatError,
    NoDataError,
    NonConvergenceError,
    NumericalFailureError,
)
from .experiments import (
    BenchmarkConfig,
    CensorWindows,
    DEFAULT_CENSOR_WINDOWS,
    EfficiencyRow,
    FIT_SOLVER_CONFIG,
    MissingDataReport,
    amse,
    apply_window_censoring,
    fit_ifs,
    metric_grid,
    run_benchmark,
    run_missing_data_experiment,
    sup_distance,
    write_benchmark_csv,
)
from .inverse import (
    QuadraticProblem,
    SolverConfig,
    SolverReport,
    assemble_quadratic_problem,
    collage_objective,
    penalized_objective_with_gradient,
    solve_box_constrained,
)
from .maps import (
    AffineMap,
    MapFamily,
    MapKind,
    SupportInterval,
    UNIT_SUPPORT,
    build_dyadic_maps,
    build_harmonic_maps,
    build_quantile_maps,
    invert_map,
)
from .moments import (
    MomentVector,
    Sample,
    empirical_moments,
    push_forward_moments,
    transfer_matrix,
)
from .operator import (
    IfsModel,
    PiecewiseCdf,
    apply_T,
    evaluate_cdf,
    fixed_point_cdf,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
)
from .rng import DEFAULT_SEED, RandomStream
from .spectral import (
    CharFnEstimate,
    FourierDensity,
    char_fn_fixed_point,
    density_estimate,
    evaluate_density,
    fit_density,
    select_num_terms,
)

__version__ = "0.1.0"

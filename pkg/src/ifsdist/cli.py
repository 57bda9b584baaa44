"""Command-line front end: fit models, evaluate curves, run the harnesses.

Subcommands
-----------
fit           fit a model to a single-column CSV of observations
eval          evaluate a saved model's CDF (and optionally density)
benchmark     Monte Carlo IFS/EDF relative-efficiency table
missing-demo  window-censored estimation demonstration

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
All randomized commands take ``--seed`` and default to a fixed documented
seed, so every run is reproducible by construction.
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .baselines import BetaParams
from .errors import (
    DegenerateSampleError,
    ModelFormatError,
    NoDataError,
    NonConvergenceError,
    NumericalFailureError,
)
from .maps import MapKind, SupportInterval, UNIT_SUPPORT
from .moments import DEFAULT_MOMENT_ORDER, Sample
from .operator import (
    DEFAULT_GRID_SIZE,
    DEFAULT_ITERATIONS,
    fixed_point_cdf,
    load_model,
    save_model,
)
from .rng import DEFAULT_SEED
from .spectral import DEFAULT_MAX_TERMS, evaluate_density, fit_density
from .experiments import (
    DEFAULT_W1_LEVELS,
    DEFAULT_W2_MAX_DENOMINATOR,
    BenchmarkConfig,
    fit_ifs,
    run_benchmark,
    run_missing_data_experiment,
    write_benchmark_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

_SUPPORT_CAVEAT = (
    "warning: no --support given and data fall outside [0,1]; using the sample "
    "range. The fitted model approximates a distribution whose support is "
    "exactly that range."
)


class _DataFileError(Exception):
    """A problem with user-supplied data files (maps to exit code 2)."""


def read_observation_csv(path: str) -> np.ndarray:
    """Read a single numeric column; '#' comments and blank lines ignored.

    The first non-comment line may be a header; any later unparseable line
    is an error naming the line number.
    """
    values: list[float] = []
    saw_data = False
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise _DataFileError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            token = line.split(",")[0].strip()
            try:
                values.append(float(token))
                saw_data = True
            except ValueError:
                if not saw_data and not values:
                    continue  # header line
                raise _DataFileError(
                    f"{path}:{lineno}: cannot parse {token!r} as a number"
                ) from None
    if not values:
        raise _DataFileError(f"{path}: no numeric observations found")
    return np.asarray(values, dtype=float)


def _parse_support(text: str) -> SupportInterval:
    try:
        alpha, beta = (float(tok) for tok in text.split(","))
        return SupportInterval(alpha, beta)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad support {text!r}: {exc}") from exc


def _resolve_sample(values: np.ndarray, support: SupportInterval | None) -> Sample:
    if support is not None:
        return Sample(values=values, support=support)
    if values.min() >= 0.0 and values.max() <= 1.0:
        return Sample(values=values, support=UNIT_SUPPORT)
    print(_SUPPORT_CAVEAT, file=sys.stderr)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        raise DegenerateSampleError("cannot infer a support from a constant sample")
    return Sample(values=values, support=SupportInterval(lo, hi))


def cmd_fit(args) -> int:
    values = read_observation_csv(args.input)
    sample = _resolve_sample(values, args.support)
    kind = MapKind(args.family)
    w1_levels = DEFAULT_W1_LEVELS
    w2_max_denominator = DEFAULT_W2_MAX_DENOMINATOR
    if args.i_star is not None:
        if kind is MapKind.W1:
            w1_levels = args.i_star
        elif kind is MapKind.W2:
            w2_max_denominator = args.i_star
    model, report = fit_ifs(
        sample,
        kind,
        w1_levels=w1_levels,
        w2_max_denominator=w2_max_denominator,
        num_quantiles=args.quantiles,
        moment_order=args.moments,
        return_report=True,
    )
    if report is None:
        print("quantile family: p fixed at 1/N", file=sys.stderr)
    else:
        print(
            f"S(p*) = {report.objective:.6e}  iterations = {report.iterations}  "
            f"simplex residual = {report.penalty_residual:.2e}  "
            f"converged = {report.converged}",
            file=sys.stderr,
        )
    save_model(model, args.out)
    print(f"model written to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    cdf = fixed_point_cdf(model, iterations=args.iterations, grid_size=args.grid)
    density = None
    if args.density:
        density = fit_density(model, args.sample_size, max_terms=args.max_terms)

    if args.at is not None:
        print(repr(float(cdf(model.support.to_unit(args.at)))))
        if density is not None:
            print(repr(float(evaluate_density(model, density, args.at))))
        return EXIT_OK

    if args.grid_out is not None:
        xs = model.support.from_unit(np.linspace(0.0, 1.0, args.grid + 1))
        cdf_vals = cdf(model.support.to_unit(xs))
        with open(args.grid_out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            if density is not None:
                writer.writerow(["x", "cdf", "density"])
                dens_vals = evaluate_density(model, density, xs)
                for x, c, d in zip(xs, cdf_vals, dens_vals):
                    writer.writerow([repr(float(x)), repr(float(c)), repr(float(d))])
            else:
                writer.writerow(["x", "cdf"])
                for x, c in zip(xs, cdf_vals):
                    writer.writerow([repr(float(x)), repr(float(c))])
        print(f"curve written to {args.grid_out}", file=sys.stderr)
        return EXIT_OK

    print("eval: nothing to do (pass --at or --grid-out)", file=sys.stderr)
    return EXIT_USAGE


def _config_from_toml(path: str) -> BenchmarkConfig:
    try:
        with open(path, "rb") as fh:
            payload = tomllib.load(fh)
    except OSError as exc:
        raise _DataFileError(f"cannot open {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise _DataFileError(f"{path}: invalid TOML: {exc}") from exc
    kwargs = {}
    if "distributions" in payload:
        kwargs["distributions"] = tuple(
            BetaParams(float(a), float(b)) for a, b in payload["distributions"]
        )
    for key in (
        "sample_sizes",
        "replications",
        "families",
        "w1_levels",
        "w2_max_denominator",
        "moment_order",
        "seed",
        "eval_grid_size",
        "cdf_grid_size",
        "iterations",
    ):
        if key in payload:
            kwargs[key] = payload[key]
    try:
        return BenchmarkConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise _DataFileError(f"{path}: bad benchmark config: {exc}") from exc


def _print_benchmark_summary(rows) -> None:
    families = list(dict.fromkeys(row.family for row in rows))
    cells = {(r.distribution, r.n, r.family, r.metric): r.ratio_percent for r in rows}
    keys = list(dict.fromkeys((r.distribution, r.n) for r in rows))
    for metric in ("amse", "sup"):
        print(f"\n{metric.upper()} relative efficiency (IFS/EDF, percent)")
        header = f"{'distribution':<16}{'n':>6}" + "".join(f"{f:>10}" for f in families)
        print(header)
        for dist, n in keys:
            line = f"{dist:<16}{n:>6}"
            for fam in families:
                value = cells.get((dist, n, fam, metric))
                line += f"{value:>10.2f}" if value is not None else f"{'-':>10}"
            print(line)


def cmd_benchmark(args) -> int:
    if args.config is not None:
        config = _config_from_toml(args.config)
    else:
        config = BenchmarkConfig()
    overrides = {}
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        config = replace(config, **overrides)
    rows = run_benchmark(config)
    write_benchmark_csv(rows, args.out)
    _print_benchmark_summary(rows)
    print(f"\ntable written to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_missing_demo(args) -> int:
    report = run_missing_data_experiment(
        n=args.n,
        seed=args.seed if args.seed is not None else DEFAULT_SEED,
        out_dir=args.out_dir,
    )
    print(
        f"retained {report.n_retained}/{report.n_total} observations\n"
        f"AMSE ratio (IFS/EDF): {report.amse_ratio_percent:.2f}%\n"
        f"SUP ratio  (IFS/EDF): {report.sup_ratio_percent:.2f}%"
    )
    for path in report.files:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifsdist",
        description="Distribution and density estimation via iterated function systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a model to a CSV of observations")
    p_fit.add_argument("input", help="single-column CSV ('#' comments allowed)")
    p_fit.add_argument("--family", required=True, choices=[k.value for k in MapKind])
    p_fit.add_argument("--i-star", type=int, default=None,
                       help="levels for w1 (default 5) / max denominator for w2 (default 8)")
    p_fit.add_argument("--quantiles", type=int, default=None,
                       help="quantile interval count for q1/q2 (default n/2)")
    p_fit.add_argument("--moments", type=int, default=DEFAULT_MOMENT_ORDER,
                       help="moment truncation order M")
    p_fit.add_argument("--support", type=_parse_support, default=None, metavar="A,B",
                       help="declared support; inferred when omitted")
    p_fit.add_argument("--out", required=True, help="output model JSON path")
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser("eval", help="evaluate a saved model")
    p_eval.add_argument("model", help="model JSON written by fit")
    p_eval.add_argument("--at", type=float, default=None, help="evaluate the CDF at x")
    p_eval.add_argument("--grid-out", default=None, help="write the curve CSV here")
    p_eval.add_argument("--density", action="store_true",
                        help="also evaluate the Fourier density")
    p_eval.add_argument("--sample-size", type=int, default=100,
                        help="sample size driving the density term-selection rule")
    p_eval.add_argument("--max-terms", type=int, default=DEFAULT_MAX_TERMS)
    p_eval.add_argument("--grid", type=int, default=DEFAULT_GRID_SIZE)
    p_eval.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("benchmark", help="IFS/EDF relative-efficiency table")
    p_bench.add_argument("--config", default=None, help="TOML benchmark config")
    p_bench.add_argument("--out", default="benchmark.csv", help="output CSV path")
    p_bench.add_argument("--replications", type=int, default=None)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.set_defaults(func=cmd_benchmark)

    p_miss = sub.add_parser("missing-demo", help="window-censored estimation demo")
    p_miss.add_argument("--n", type=int, default=400, help="sample size before censoring")
    p_miss.add_argument("--seed", type=int, default=None)
    p_miss.add_argument("--out-dir", default=None, help="directory for curve CSVs")
    p_miss.set_defaults(func=cmd_missing_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage problems; remap the
        # latter onto this tool's usage code.
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        return args.func(args)
    except (
        _DataFileError,
        ModelFormatError,
        NoDataError,
        DegenerateSampleError,
        ValueError,
    ) as exc:
        # ValueError covers domain validation (values outside the declared
        # support, bad family parameters) triggered by user inputs.
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalFailureError, NonConvergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())

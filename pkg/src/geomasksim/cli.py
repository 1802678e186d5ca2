"""Command-line entry points.

Subcommands:

    simulate    run a configured experiment; emit records/curve CSVs,
                efficiency table, SVG plots, baseline JSON, and a manifest
    mask        mask a point CSV once and emit the masked CSV
    fit         fit the distance logit on a point+choice CSV
    efficiency  emit the efficiency-loss table for a configured dataset
    plot        render SVGs from previously written curve/record CSVs

Exit codes: 0 success; 1 validation error (arguments, config, input data);
2 runtime failure (convergence batch failure, masking exhaustion).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunOptions, config_hash, parse_config, parse_run_options
from .density import DegenerateSampleError, kde
from .efficiency import DEFAULT_MOMENT_VARIANT, MOMENT_VARIANTS, efficiency_report
from .experiments import (
    BatchConvergenceError,
    FAST_REPLICATIONS,
    ExperimentConfig,
    prepare_dataset,
    run_baseline,
    run_efficiency_experiment,
    run_experiment,
)
from .logit import InvalidFitError, LogitFit, SeparationError, fit_distance_choice, wald_ci
from .masking import BoundaryExhaustionError, MaskSpec, mask_coordinates
from .reports import (
    RunManifest,
    read_curve_csv,
    read_points_csv,
    read_records_csv,
    write_curve_csv,
    write_efficiency_csv,
    write_manifest,
    write_points_csv,
    write_records_csv,
)
from .rng import derive_stream
from .svgplot import render_attenuation_svg, render_kde_svg

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class _CliError(Exception):
    """Validation failure carrying the message to print on stderr."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; validation is 1 here
        raise _CliError(message)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _baseline_payload(fit: LogitFit) -> dict:
    ci_alpha, ci_beta = wald_ci(fit)
    return {
        "alpha": fit.params.alpha,
        "beta": fit.params.beta,
        "se_alpha": fit.std_errors[0],
        "se_beta": fit.std_errors[1],
        "ci_alpha": list(ci_alpha),
        "ci_beta": list(ci_beta),
        "loglik": fit.loglik,
        "iterations": fit.iterations,
        "converged": fit.converged,
    }


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.workers is not None:
        changes["workers"] = args.workers
    if getattr(args, "fast", False):
        changes["replications"] = FAST_REPLICATIONS
    return dataclasses.replace(config, **changes) if changes else config


def _load_config(args) -> tuple[ExperimentConfig, RunOptions]:
    config = parse_config(args.config)
    options = parse_run_options(args.config)
    if args.out_dir is not None:
        options = dataclasses.replace(options, out_dir=args.out_dir)
    return _apply_overrides(config, args), options


def _cmd_simulate(args) -> int:
    config, options = _load_config(args)
    started = _utcnow()
    result = run_experiment(config)
    eff_run = None
    if config.experiment != "centroid":
        eff_run = run_efficiency_experiment(config, baseline=result.baseline, ds=result.dataset)

    out = Path(options.out_dir)
    prefix = options.prefix
    outputs = []

    def record(path: Path):
        outputs.append(str(path))
        return path

    record(write_records_csv(result.records, out / f"{prefix}_records.csv"))
    reports = eff_run.reports if eff_run is not None else None
    record(write_curve_csv(result.curve, reports, out / f"{prefix}_curve.csv"))
    if reports:
        record(write_efficiency_csv(reports, out / f"{prefix}_efficiency.csv"))

    baseline_path = out / f"{prefix}_baseline.json"
    baseline_path.parent.mkdir(parents=True, exist_ok=True)
    baseline_path.write_text(json.dumps(_baseline_payload(result.baseline), indent=2) + "\n", encoding="utf-8")
    record(baseline_path)

    if options.write_plots:
        record(render_attenuation_svg(result.curve, result.baseline.params.beta, out / f"{prefix}_attenuation.svg"))
        largest = max(r.theta_star for r in result.records)
        betas = [r.beta_hat for r in result.records if r.theta_star == largest and r.converged]
        try:
            estimate = kde(np.array(betas))
            record(
                render_kde_svg(
                    estimate,
                    result.baseline.params.beta,
                    wald_ci(result.baseline)[1],
                    out / f"{prefix}_kde.svg",
                )
            )
        except (DegenerateSampleError, ValueError):
            print("note: replication estimates degenerate at the largest theta*; KDE plot skipped")

    manifest = RunManifest(
        config_hash=config_hash(config, options),
        seed=config.seed,
        version=__version__,
        started_at=started,
        finished_at=_utcnow(),
        outputs=sorted(outputs),
    )
    record(write_manifest(manifest, out / f"{prefix}_manifest.json"))

    b = result.baseline
    print(
        f"experiment={config.experiment} n={config.n} replications={config.replications} "
        f"seed={config.seed} workers={config.workers}"
    )
    lo, hi = wald_ci(b)[1]
    print(
        f"baseline: alpha={b.params.alpha:.4f} beta={b.params.beta:.4f} "
        f"se_beta={b.std_errors[1]:.4f} ci95=[{lo:.4f}, {hi:.4f}]"
    )
    print(f"{'theta*':>10} {'mean|b|':>9} {'sd(b)':>8} {'%outside':>9} {'%nonsig':>9} {'conv':>6}")
    for row in result.curve.rows:
        print(
            f"{row.theta_star:>10.4f} {row.mean_abs_beta:>9.4f} {row.sd_beta:>8.4f} "
            f"{row.pct_outside_true_ci:>9.1f} {row.pct_nonsignificant:>9.1f} "
            f"{row.convergence_rate:>6.1%}"
        )
    for path in outputs:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_mask(args) -> int:
    ids, xy, choices = read_points_csv(args.points)
    spec = MaskSpec(mechanism=args.mechanism, theta_star=args.theta_star, boundary=args.boundary)
    bounds = None
    if args.boundary == "redraw":
        if args.area is None:
            raise _CliError("--boundary redraw requires --area XMIN XMAX YMIN YMAX")
        xmin, xmax, ymin, ymax = args.area
        if not (xmin < xmax and ymin < ymax):
            raise _CliError("--area must satisfy XMIN < XMAX and YMIN < YMAX")
        bounds = np.tile(np.array([xmin, xmax, ymin, ymax]), (xy.shape[0], 1))
    masked = mask_coordinates(xy, spec, bounds, derive_stream(args.seed or 0, 0, 0))
    write_points_csv(masked, args.out, choices=choices, ids=ids)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    ids, xy, choices = read_points_csv(args.points)
    if choices is None:
        raise _CliError(f"{args.points} has no choice column; `fit` needs id,x,y,choice")
    d = np.hypot(xy[:, 0] - args.facility_x, xy[:, 1] - args.facility_y)
    try:
        fit = fit_distance_choice(d, choices.astype(np.float64))
    except SeparationError as exc:
        raise _CliError(str(exc)) from exc
    print(f"n={len(ids)} converged={str(fit.converged).lower()} iterations={fit.iterations}")
    print(f"alpha={fit.params.alpha:.6f} se={fit.std_errors[0]:.6f}")
    print(f"beta={fit.params.beta:.6f} se={fit.std_errors[1]:.6f}")
    if fit.converged:
        (alo, ahi), (blo, bhi) = wald_ci(fit)
        print(f"ci95_alpha=[{alo:.6f}, {ahi:.6f}] ci95_beta=[{blo:.6f}, {bhi:.6f}]")
        print(f"loglik={fit.loglik:.6f}")
        return EXIT_OK
    print("fit did not converge", file=sys.stderr)
    return EXIT_RUNTIME


def _cmd_efficiency(args) -> int:
    config, options = _load_config(args)
    reps = args.empirical_reps
    if reps:
        run = run_efficiency_experiment(config, replications=reps, variant=args.variant)
        reports = run.reports
    else:
        ds = prepare_dataset(config)
        baseline = run_baseline(config, ds)
        reports = [
            efficiency_report(ds, baseline.params, t, variant=args.variant)
            for t in config.theta_values()
        ]
    path = write_efficiency_csv(reports, Path(options.out_dir) / f"{options.prefix}_efficiency.csv")
    print(f"{'theta*':>10} {'info_true':>12} {'info_masked':>12} {'el_analytic':>12} {'el_empirical':>13}")
    for r in reports:
        emp = f"{r.el_empirical:>13.4f}" if r.el_empirical is not None else f"{'-':>13}"
        print(f"{r.theta_star:>10.4f} {r.info_true:>12.4f} {r.info_masked_analytic:>12.4f} {r.el_analytic:>12.6f} {emp}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    if args.curve is None and args.records is None:
        raise _CliError("plot needs --curve and/or --records")
    baseline = json.loads(Path(args.baseline).read_text(encoding="utf-8"))
    out = Path(args.out_dir)
    if args.curve is not None:
        curve = read_curve_csv(args.curve)
        path = render_attenuation_svg(curve, baseline["beta"], out / "attenuation.svg")
        print(f"wrote {path}")
    if args.records is not None:
        records = read_records_csv(args.records)
        theta = args.theta_star if args.theta_star is not None else max(r.theta_star for r in records)
        betas = [r.beta_hat for r in records if r.converged and abs(r.theta_star - theta) <= 1e-12]
        if not betas:
            raise _CliError(f"no converged records at theta*={theta:g} in {args.records}")
        try:
            estimate = kde(np.array(betas))
        except (DegenerateSampleError, ValueError) as exc:
            raise _CliError(f"cannot build KDE at theta*={theta:g}: {exc}") from exc
        path = render_kde_svg(estimate, baseline["beta"], tuple(baseline["ci_beta"]), out / "kde.svg")
        print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="geomasksim", description="Geo-masking bias and efficiency-loss simulations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", required=True, help="experiment config file (INI)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--workers", type=int, default=None, help="override the config worker count")
        p.add_argument("--out-dir", default=None, help="override the config output directory")

    p = sub.add_parser("simulate", help="run an experiment from a config file")
    add_run_flags(p)
    p.add_argument("--fast", action="store_true", help=f"use {FAST_REPLICATIONS} replications")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mask", help="mask a point CSV once")
    p.add_argument("--points", required=True, help="input CSV (id,x,y[,choice])")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--theta-star", type=float, required=True, help="maximum displacement distance")
    p.add_argument("--mechanism", choices=["uniform", "gaussian"], default="uniform")
    p.add_argument("--boundary", choices=["unconstrained", "redraw"], default="unconstrained")
    p.add_argument("--area", type=float, nargs=4, default=None,
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"),
                   help="study-area bounds for --boundary redraw")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("fit", help="fit the distance logit on a point+choice CSV")
    p.add_argument("--points", required=True, help="input CSV (id,x,y,choice)")
    p.add_argument("--facility-x", type=float, default=0.0)
    p.add_argument("--facility-y", type=float, default=0.0)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("efficiency", help="emit the efficiency-loss table for a configured dataset")
    add_run_flags(p)
    p.add_argument("--variant", choices=list(MOMENT_VARIANTS), default=DEFAULT_MOMENT_VARIANT)
    p.add_argument(
        "--empirical-reps", type=int, default=0,
        help="replications for the empirical variance ratio (0 = analytic only)",
    )
    p.set_defaults(func=_cmd_efficiency)

    p = sub.add_parser("plot", help="render SVGs from curve/record CSVs")
    p.add_argument("--curve", default=None, help="curve CSV for the attenuation plot")
    p.add_argument("--records", default=None, help="records CSV for the KDE plot")
    p.add_argument("--baseline", required=True, help="baseline JSON written by `simulate`")
    p.add_argument("--theta-star", type=float, default=None, help="KDE cell (default: largest theta*)")
    p.add_argument("--out-dir", default="results")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, FileNotFoundError, SeparationError, InvalidFitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BatchConvergenceError, BoundaryExhaustionError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

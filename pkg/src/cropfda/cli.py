"""Command-line front end.

Subcommands: ``simulate`` (synthetic corpus), ``fit`` (estimate and persist a
model), ``bands`` (bootstrap band CSVs), ``effect`` (scenario calculator) and
``report`` (coefficient CSVs plus SVG figures).

Exit codes: 0 success, 1 runtime/model error, 2 validation error, 3 missing
artifact.  Errors are emitted as one JSON object on standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import bands as bands_mod
from . import report as report_mod
from .config import RunConfig, load_run_config, run_config_from_echo
from .effects import PRECIPITATION_RAMP, TEMPERATURE_STEP, ScenarioSpec, scenario_effect
from .errors import (
    AlignmentError,
    ConfigError,
    CropFdaError,
    DataError,
    DomainError,
    IntervalError,
    MissingArtifactError,
    UnknownNameError,
)
from .estimator import FitResult, fit_from_smoothed, load_model, save_model, smooth_covariates
from .ingest import (
    builtin_synth_spec,
    generate_synthetic,
    load_synth_spec,
    load_weather_panel,
    load_yield_panel,
    write_corpus,
)
from .seasons import window_to_days

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2
EXIT_MISSING = 3

_VALIDATION_ERRORS = (
    ConfigError,
    DataError,
    DomainError,
    IntervalError,
    UnknownNameError,
    AlignmentError,
)


def _require_file(path, role: str) -> None:
    if not os.path.exists(path):
        raise MissingArtifactError(f"{role} not found: {path}")


def _load_inputs(config: RunConfig):
    _require_file(config.yields_path, "yields CSV")
    for name, wp in config.weather_paths.items():
        _require_file(wp["csv"], f"weather CSV for {name!r}")
        _require_file(wp["meta"], f"weather sidecar for {name!r}")
    panel = load_yield_panel(config.yields_path)
    raws = {}
    for name, wp in config.weather_paths.items():
        raw = load_weather_panel(wp["csv"], wp["meta"], panel)
        if raw.covariate_name != name:
            raise ConfigError(
                f"sidecar covariate {raw.covariate_name!r} does not match config name {name!r}"
            )
        if not raw.domain.same_interval(config.model_spec.season):
            raise ConfigError(
                f"sidecar season length {raw.domain.t_end} does not match "
                f"config season length {config.model_spec.season.t_end} for {name!r}"
            )
        raws[name] = raw
    return panel, raws


def _model_from_path(path) -> FitResult:
    _require_file(path, "model file")
    return load_model(path)


def cmd_fit(args) -> int:
    config = load_run_config(args.config)
    panel, raws = _load_inputs(config)
    smoothed = smooth_covariates(config.model_spec, raws)
    fit = fit_from_smoothed(config.model_spec, panel, smoothed, config_echo=config.echo)
    os.makedirs(config.output_dir, exist_ok=True)
    model_path = os.path.join(config.output_dir, "model.json")
    save_model(fit, model_path)

    print(f"wrote {model_path}")
    if panel.dropped:
        print(f"dropped incomplete provinces: {', '.join(panel.dropped)}")
    print(
        f"provinces={len(fit.provinces)} years={len(fit.years)} "
        f"parameters={fit.n_parameters}"
    )
    for name, cov in fit.covariates.items():
        retained = cov.fpca.n_retained
        cum = float(np.sum(cov.fpca.variance_fraction[:retained]))
        print(f"{name}: L={retained} cumulative_variance={cum:.4f}")
    diag = fit.fits["ols"].diagnostics
    print(
        f"ols: adjusted_r2={diag['adjusted_r2']:.4f} "
        f"prediction_correlation={diag['prediction_correlation']:.4f}"
    )
    return EXIT_OK


def cmd_bands(args) -> int:
    fit = _model_from_path(args.model)
    if not fit.config_echo:
        raise ConfigError("model document does not record its data paths; refit via the CLI")
    config = run_config_from_echo(fit.config_echo)
    replicas = args.replicas if args.replicas is not None else config.bootstrap["replicas"]
    level = args.level if args.level is not None else config.bootstrap["level"]
    seed = args.seed if args.seed is not None else config.bootstrap["seed"]
    tags = args.estimator if args.estimator else list(fit.fits)
    for tag in tags:
        fit.fit(tag)  # validates the tag

    panel, raws = _load_inputs(config)
    smoothed = smooth_covariates(config.model_spec, raws)
    out_dir = args.out if args.out else os.path.join(os.path.dirname(args.model) or ".", "bands")
    os.makedirs(out_dir, exist_ok=True)
    for tag in tags:
        results = bands_mod.bootstrap_bands(
            config.model_spec, panel, smoothed, tag,
            n_replicas=replicas, level=level, seed=seed,
        )
        for name, band in results.items():
            path = os.path.join(out_dir, bands_mod.band_filename(name, tag))
            bands_mod.write_band_csv(band, path)
            print(f"wrote {path}")
    return EXIT_OK


def cmd_effect(args) -> int:
    fit = _model_from_path(args.model)
    if (args.delta_t is None) == (args.delta_p is None):
        raise ConfigError("exactly one of --delta-t or --delta-p is required")
    if not fit.config_echo:
        raise ConfigError("model document does not record its season calendar; refit via the CLI")
    season_start = fit.config_echo["season"]["start"]
    t0, t1 = window_to_days(args.window_from, args.window_to, season_start, fit.spec.season.t_end)
    if args.delta_t is not None:
        kind, delta = TEMPERATURE_STEP, args.delta_t
    else:
        kind, delta = PRECIPITATION_RAMP, args.delta_p
    spec = ScenarioSpec(
        kind=kind, delta=delta, t0=t0, t1=t1,
        covariate=args.covariate, estimator=args.estimator,
    )
    result = scenario_effect(fit, spec)
    payload = {
        "delta_log_yield": result.delta_log_yield,
        "yield_ratio": result.yield_ratio,
        "yield_ratio_printed": f"{result.yield_ratio:.6f}",
        "integral_value": result.integral_value,
        "scenario": {
            "kind": kind,
            "delta": delta,
            "covariate": args.covariate,
            "estimator": args.estimator,
            "from": args.window_from,
            "to": args.window_to,
            "t0": t0,
            "t1": t1,
        },
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    return EXIT_OK


def cmd_report(args) -> int:
    fit = _model_from_path(args.model)
    if not os.path.isdir(args.bands):
        raise MissingArtifactError(f"bands directory not found: {args.bands}")
    level = None
    if fit.config_echo:
        level = fit.config_echo.get("bootstrap", {}).get("level")
    written, missing = report_mod.write_report(fit, args.bands, args.out, level=level)
    for path in missing:
        print(f"missing band file skipped: {path}", file=sys.stderr)
    if not written:
        raise MissingArtifactError(f"no band files for this model in {args.bands}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.spec in ("default", "maize", "wheat"):
        spec = builtin_synth_spec(args.spec)
    else:
        spec = load_synth_spec(args.spec)
    if os.path.isdir(args.out) and os.listdir(args.out) and not args.force:
        raise ConfigError(
            f"output directory {args.out} is not empty (use --force to overwrite)"
        )
    data = generate_synthetic(spec)
    paths = write_corpus(data, spec, args.out)
    for role in sorted(paths):
        print(f"wrote {paths[role]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cropfda",
        description="Scalar-on-function regression toolkit for crop-yield panels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate a model from a run config")
    p.add_argument("--config", required=True, help="run config JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bands", help="bootstrap confidence bands for a fitted model")
    p.add_argument("--model", required=True, help="model JSON from 'fit'")
    p.add_argument("--replicas", type=int, default=None)
    p.add_argument("--level", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory (default: <model dir>/bands)")
    p.add_argument("--estimator", action="append", default=None,
                   help="estimator tag to band (repeatable; default: all)")
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("effect", help="scenario yield effect from a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--covariate", required=True)
    p.add_argument("--estimator", required=True)
    p.add_argument("--delta-t", type=float, default=None, dest="delta_t",
                   help="temperature step in degrees C")
    p.add_argument("--delta-p", type=float, default=None, dest="delta_p",
                   help="precipitation change in mm, spread over the window")
    p.add_argument("--from", required=True, dest="window_from", metavar="MM-DD")
    p.add_argument("--to", required=True, dest="window_to", metavar="MM-DD")
    p.set_defaults(func=cmd_effect)

    p = sub.add_parser("report", help="coefficient CSVs and SVG figures")
    p.add_argument("--model", required=True)
    p.add_argument("--bands", required=True, help="directory with band CSVs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="generate a synthetic corpus with known truth")
    p.add_argument("--spec", required=True,
                   help="synth spec JSON, or one of: default, maize, wheat")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true",
                   help="write into a non-empty output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def _fail(code: int, exc: Exception) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MissingArtifactError as exc:
        return _fail(EXIT_MISSING, exc)
    except _VALIDATION_ERRORS as exc:
        return _fail(EXIT_VALIDATION, exc)
    except CropFdaError as exc:
        return _fail(EXIT_RUNTIME, exc)


if __name__ == "__main__":
    sys.exit(main())

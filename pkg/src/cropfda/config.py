"""Run configuration: strict JSON schema for the fit pipeline.

Unknown fields anywhere in the document are rejected so typos in basis sizes
or window settings cannot silently change the analysis.  Relative paths
resolve against the directory containing the config file.  An even Fourier
basis size is rounded up to the next odd size (the constant plus complete
sin/cos pairs); the echoed configuration records the realized size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, MissingArtifactError
from .estimator import CovariateSpec, ModelSpec
from .seasons import season_domain

CONFIG_SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version",
    "crop",
    "season",
    "base_year",
    "trend_degree",
    "delta",
    "quantiles",
    "qa_offsets",
    "qa_include_center",
    "covariates",
    "bootstrap",
    "paths",
}
_TOP_REQUIRED = {"schema_version", "crop", "season", "covariates", "paths"}
_BASIS_KEYS = {
    "fourier": {"kind", "nbasis"},
    "spline": {"kind", "nbasis", "order", "interior_knots"},
    "polygonal": {"kind", "nbasis", "nodes"},
}


def _check_keys(doc: dict, allowed: set, required: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown fields {sorted(unknown)}")
    missing = required - set(doc)
    if missing:
        raise ConfigError(f"{where}: missing fields {sorted(missing)}")


def _normalize_basis(cfg, where: str) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError(f"{where}: basis config must be an object")
    kind = cfg.get("kind")
    if kind not in _BASIS_KEYS:
        raise ConfigError(f"{where}: unknown basis kind {kind!r}")
    _check_keys(cfg, _BASIS_KEYS[kind], {"kind", "nbasis"}, where)
    out = dict(cfg)
    if kind == "fourier" and out["nbasis"] % 2 == 0:
        out["nbasis"] = out["nbasis"] + 1
    return out


@dataclass
class RunConfig:
    crop: str
    season_start: str
    season_end: str
    model_spec: ModelSpec
    bootstrap: dict
    yields_path: str
    weather_paths: dict   # name -> {"csv": ..., "meta": ...}
    output_dir: str
    echo: dict            # normalized document with resolved paths


def parse_run_config(doc: dict, base_dir=".") -> RunConfig:
    base = Path(base_dir)
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, _TOP_KEYS, _TOP_REQUIRED, "config")
    if doc["schema_version"] != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"config: unsupported schema_version {doc['schema_version']!r} "
            f"(expected {CONFIG_SCHEMA_VERSION})"
        )
    season = doc["season"]
    _check_keys(season, {"start", "end"}, {"start", "end"}, "config.season")
    domain = season_domain(season["start"], season["end"], str(doc["crop"]))

    cov_specs = []
    norm_covs = []
    if not isinstance(doc["covariates"], list) or not doc["covariates"]:
        raise ConfigError("config.covariates must be a non-empty list")
    for k, cdoc in enumerate(doc["covariates"]):
        where = f"config.covariates[{k}]"
        _check_keys(
            cdoc,
            {"name", "smoothing_basis", "harmonic_basis", "window"},
            {"name", "smoothing_basis", "harmonic_basis"},
            where,
        )
        window = cdoc.get("window")
        if window is not None and window != "full" and (
            not isinstance(window, int) or isinstance(window, bool) or window < 0
        ):
            raise ConfigError(f"{where}: window must be null, 'full' or a nonnegative integer")
        smoothing = _normalize_basis(cdoc["smoothing_basis"], f"{where}.smoothing_basis")
        harmonic = _normalize_basis(cdoc["harmonic_basis"], f"{where}.harmonic_basis")
        cov_specs.append(
            CovariateSpec(
                name=str(cdoc["name"]),
                smoothing_basis=smoothing,
                harmonic_basis=harmonic,
                window=window,
            )
        )
        norm_covs.append(
            {"name": str(cdoc["name"]), "smoothing_basis": smoothing,
             "harmonic_basis": harmonic, "window": window}
        )

    model_spec = ModelSpec(
        season=domain,
        covariates=tuple(cov_specs),
        trend_degree=int(doc.get("trend_degree", 2)),
        delta=float(doc.get("delta", 0.9)),
        quantiles=tuple(doc.get("quantiles", [0.1, 0.9])),
        qa_offsets=tuple(doc.get("qa_offsets", [-0.05, -0.025, 0.025, 0.05])),
        qa_include_center=bool(doc.get("qa_include_center", False)),
        base_year=doc.get("base_year"),
    )

    boot = doc.get("bootstrap", {})
    _check_keys(boot, {"replicas", "level", "seed"}, set(), "config.bootstrap")
    bootstrap = {
        "replicas": int(boot.get("replicas", 500)),
        "level": float(boot.get("level", 0.95)),
        "seed": int(boot.get("seed", 0)),
    }
    if bootstrap["replicas"] < 2:
        raise ConfigError("config.bootstrap.replicas must be >= 2")
    if not (0.0 < bootstrap["level"] < 1.0):
        raise ConfigError("config.bootstrap.level must lie in (0, 1)")

    paths = doc["paths"]
    _check_keys(paths, {"yields", "weather", "output_dir"}, {"yields", "weather", "output_dir"}, "config.paths")
    yields_path = str(base / paths["yields"])
    weather_paths = {}
    if set(paths["weather"]) != {c.name for c in cov_specs}:
        raise ConfigError(
            f"config.paths.weather must name exactly the covariates "
            f"{sorted(c.name for c in cov_specs)}, got {sorted(paths['weather'])}"
        )
    for name, wdoc in paths["weather"].items():
        _check_keys(wdoc, {"csv", "meta"}, {"csv"}, f"config.paths.weather[{name}]")
        csv_path = str(base / wdoc["csv"])
        meta_path = str(base / wdoc["meta"]) if "meta" in wdoc else csv_path + ".meta.json"
        weather_paths[name] = {"csv": csv_path, "meta": meta_path}
    output_dir = str(base / paths["output_dir"])

    echo = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "crop": str(doc["crop"]),
        "season": {"start": season["start"], "end": season["end"]},
        "base_year": model_spec.base_year,
        "trend_degree": model_spec.trend_degree,
        "delta": model_spec.delta,
        "quantiles": list(model_spec.quantiles),
        "qa_offsets": list(model_spec.qa_offsets),
        "qa_include_center": model_spec.qa_include_center,
        "covariates": norm_covs,
        "bootstrap": bootstrap,
        "paths": {
            "yields": yields_path,
            "weather": weather_paths,
            "output_dir": output_dir,
        },
    }
    return RunConfig(
        crop=str(doc["crop"]),
        season_start=season["start"],
        season_end=season["end"],
        model_spec=model_spec,
        bootstrap=bootstrap,
        yields_path=yields_path,
        weather_paths=weather_paths,
        output_dir=output_dir,
        echo=echo,
    )


def load_run_config(path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise MissingArtifactError(f"config not found: {path}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_run_config(doc, base_dir=p.parent)


def run_config_from_echo(echo: dict) -> RunConfig:
    """Rebuild a RunConfig from the echo stored in a model document (paths
    are already resolved)."""
    return parse_run_config(echo, base_dir=".")


def load_profile(name: str) -> dict:
    """Shipped crop profile (config skeleton with empty data paths)."""
    try:
        text = resources.files("cropfda").joinpath(f"profiles/{name}.json").read_text("utf-8")
    except FileNotFoundError:
        raise ConfigError(f"no shipped profile named {name!r}") from None
    return json.loads(text)

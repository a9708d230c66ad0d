"""Panel ingestion and the synthetic ground-truth generator.

CSV schemas (UTF-8, comma-delimited, header mandatory):

* yields:  ``province_id,year,production_kg,area_ha``
* weather: ``province_id,year,t_index,value`` plus a sidecar JSON declaring
  ``{cadence, n_samples, season_start, season_end, covariate}``.

Floats are written with 17 significant digits so that written panels reload
bit-exactly.  The generator assembles responses from closed-form coefficient
curves integrated against the generated weather by fine-grid quadrature,
independent of the estimation pipeline's own quadrature, and records every
generating quantity in a truth document.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .basis import SeasonDomain, SplineBasis, basis_from_config
from .errors import (
    ConfigError,
    EmptyPanelError,
    FormatError,
    IntegrityError,
    MissingArtifactError,
    RecordError,
)
from .estimator import YieldPanel
from .fdata import HOURS_PER_DAY, RawSeriesPanel
from .seasons import season_domain

YIELD_HEADER = ["province_id", "year", "production_kg", "area_ha"]
WEATHER_HEADER = ["province_id", "year", "t_index", "value"]
SIDECAR_KEYS = {"cadence", "n_samples", "season_start", "season_end", "covariate"}
FINE_QUAD_POINTS = 20001


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _open_csv(path):
    try:
        return open(path, "r", encoding="utf-8", newline="")
    except FileNotFoundError:
        raise MissingArtifactError(f"file not found: {path}") from None


# -- yield panel ---------------------------------------------------------------


def load_yield_panel(path) -> YieldPanel:
    """Balanced log-yield panel from a yields CSV.

    Provinces missing any year of the panel's full year range are dropped and
    listed in ``panel.dropped``; the year range is the min..max of the file.
    """
    records = {}
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != YIELD_HEADER:
            raise FormatError(f"{path}: expected header {YIELD_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            province = row[0]
            try:
                year = int(row[1])
                production = float(row[2])
                area = float(row[3])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if area <= 0:
                raise RecordError(f"{path}:{lineno}: non-positive area {area}")
            if production <= 0:
                raise RecordError(
                    f"{path}:{lineno}: non-positive production {production} "
                    "(log yield undefined)"
                )
            key = (province, year)
            if key in records:
                raise RecordError(f"{path}:{lineno}: duplicate record for {key}")
            records[key] = math.log(production / area)

    if not records:
        raise EmptyPanelError(f"{path}: no records")
    years = sorted({year for _, year in records})
    years = list(range(years[0], years[-1] + 1))
    provinces = sorted({prov for prov, _ in records})
    complete, dropped = [], []
    for prov in provinces:
        missing = [year for year in years if (prov, year) not in records]
        if missing:
            dropped.append(prov)
        else:
            complete.append(prov)
    if not complete:
        raise EmptyPanelError(f"{path}: no province covers the full year range {years[0]}..{years[-1]}")
    y = np.array([[records[(prov, year)] for year in years] for prov in complete])
    return YieldPanel(provinces=complete, years=years, y=y, dropped=dropped)


def write_yield_csv(provinces, years, production, area, path) -> None:
    production = np.asarray(production, dtype=float)
    area = np.asarray(area, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(YIELD_HEADER)
        for j, prov in enumerate(provinces):
            for i, year in enumerate(years):
                writer.writerow([prov, year, _fmt(production[j, i]), _fmt(area[j, i])])


# -- weather panel ---------------------------------------------------------------


def read_sidecar(meta) -> dict:
    if isinstance(meta, dict):
        doc = dict(meta)
        source = "<dict>"
    else:
        source = str(meta)
        try:
            with open(meta, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise MissingArtifactError(f"sidecar not found: {meta}") from None
        except json.JSONDecodeError as exc:
            raise FormatError(f"{meta}: invalid JSON ({exc})") from None
    keys = set(doc)
    if keys != SIDECAR_KEYS:
        missing, extra = SIDECAR_KEYS - keys, keys - SIDECAR_KEYS
        raise FormatError(
            f"{source}: sidecar keys mismatch (missing {sorted(missing)}, unknown {sorted(extra)})"
        )
    if doc["cadence"] not in ("hourly", "daily"):
        raise FormatError(f"{source}: cadence must be 'hourly' or 'daily'")
    doc["n_samples"] = int(doc["n_samples"])
    return doc


def load_weather_panel(path, meta, yield_panel: YieldPanel) -> RawSeriesPanel:
    """Dense weather panel covering every cell of the yield panel.

    Rows for provinces or years outside the yield panel are ignored; a gap,
    duplicate or missing (province, year, index) is an integrity error.
    """
    side = read_sidecar(meta)
    n_samples = side["n_samples"]
    domain = season_domain(side["season_start"], side["season_end"], side["covariate"])

    provinces, years = yield_panel.provinces, yield_panel.years
    n_years = len(years)
    index = {
        (prov, year): j * n_years + i
        for j, prov in enumerate(provinces)
        for i, year in enumerate(years)
    }
    values = np.full((len(index), n_samples), np.nan)
    with _open_csv(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != WEATHER_HEADER:
            raise FormatError(f"{path}: expected header {WEATHER_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                year = int(row[1])
                t_index = int(row[2])
                value = float(row[3])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            cell = index.get((row[0], year))
            if cell is None:
                continue
            if not (0 <= t_index < n_samples):
                raise IntegrityError(
                    f"{path}:{lineno}: t_index {t_index} outside 0..{n_samples - 1} "
                    f"for ({row[0]}, {year})"
                )
            if not np.isnan(values[cell, t_index]):
                raise IntegrityError(
                    f"{path}: duplicate sample ({row[0]}, {year}, {t_index})"
                )
            values[cell, t_index] = value

    gaps = np.argwhere(np.isnan(values))
    if gaps.size:
        cell, t_index = gaps[0]
        prov = provinces[cell // n_years]
        year = years[cell % n_years]
        raise IntegrityError(
            f"{path}: missing sample ({prov}, {year}, {t_index}) "
            f"plus {len(gaps) - 1} more"
        )
    return RawSeriesPanel(
        covariate_name=side["covariate"],
        cadence=side["cadence"],
        values=values,
        provinces=list(provinces),
        years=list(years),
        domain=domain,
    )


def write_weather_csv(raw: RawSeriesPanel, path, season_start: str, season_end: str) -> None:
    """Long-format weather CSV plus its sidecar at ``<path>.meta.json``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(WEATHER_HEADER)
        n_years = len(raw.years)
        for cell in range(raw.values.shape[0]):
            prov = raw.provinces[cell // n_years]
            year = raw.years[cell % n_years]
            for t_index in range(raw.n_samples):
                writer.writerow([prov, year, t_index, _fmt(raw.values[cell, t_index])])
    sidecar = {
        "cadence": raw.cadence,
        "n_samples": raw.n_samples,
        "season_start": season_start,
        "season_end": season_end,
        "covariate": raw.covariate_name,
    }
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")


# -- closed-form curves ----------------------------------------------------------


def eval_curve(descr, t, domain: SeasonDomain) -> np.ndarray:
    """Evaluate a closed-form curve description at times t.

    A description is a term dict or a list of term dicts (summed):
    ``const``, ``half_sine`` (sin(k pi t/T)), ``sine``/``cosine`` (full
    period), ``poly`` (in t/T), or ``spline`` (coefficients on a spline
    basis).
    """
    t = np.asarray(t, dtype=float)
    T = domain.t_end
    terms = descr if isinstance(descr, list) else [descr]
    out = np.zeros_like(t)
    for term in terms:
        kind = term.get("kind")
        amp = float(term.get("amplitude", 1.0))
        if kind == "const":
            out = out + float(term["value"])
        elif kind == "half_sine":
            out = out + amp * np.sin(term["k"] * np.pi * t / T)
        elif kind == "sine":
            out = out + amp * np.sin(2.0 * np.pi * term["k"] * t / T)
        elif kind == "cosine":
            out = out + amp * np.cos(2.0 * np.pi * term["k"] * t / T)
        elif kind == "poly":
            out = out + np.polyval(list(reversed(term["coeffs"])), t / T)
        elif kind == "spline":
            basis = basis_from_config(term["basis"], domain)
            out = out + amp * (basis.evaluate(t) @ np.asarray(term["coefs"], dtype=float))
        else:
            raise ConfigError(f"unknown curve kind {kind!r}")
    return out


def fine_quadrature(func, t0: float, t1: float, npoints: int = FINE_QUAD_POINTS) -> float:
    """Trapezoid integral on a dense grid; the generator's independent rule."""
    t = np.linspace(t0, t1, npoints)
    return float(np.trapezoid(func(t), t))


def periodic_spline_modes(domain: SeasonDomain, nbasis: int, order: int = 4, n_modes: int | None = None):
    """L2-orthonormal spline-space curves with matching endpoint values.

    The f(0) = f(T) constraint keeps the curves friendly to Fourier smoothing;
    at most ``nbasis - 1`` such modes exist.
    """
    basis = SplineBasis(domain, nbasis=nbasis, order=order)
    rows = basis.evaluate([domain.t_start, domain.t_end])
    constraint = (rows[0] - rows[1])[None, :]
    nullsp = null_space(constraint)
    gn = nullsp.T @ basis.gram() @ nullsp
    s, u = np.linalg.eigh(0.5 * (gn + gn.T))
    order_idx = np.argsort(s)[::-1]
    s, u = s[order_idx], u[:, order_idx]
    coefs = (nullsp @ (u / np.sqrt(s))).T        # rows are orthonormal curves
    integrals = coefs @ basis.element_integrals()
    at_zero = coefs @ rows[0]
    ref = np.where(np.abs(integrals) > 1e-10 * np.sqrt(domain.length), integrals, at_zero)
    coefs[ref < 0] *= -1.0
    n_modes = coefs.shape[0] if n_modes is None else n_modes
    if n_modes > coefs.shape[0]:
        raise ConfigError(
            f"only {coefs.shape[0]} periodic spline modes available, requested {n_modes}"
        )
    basis_cfg = basis.to_config()
    return [
        {"kind": "spline", "basis": basis_cfg, "coefs": [float(v) for v in coefs[k]]}
        for k in range(n_modes)
    ]


# -- synthetic generator ---------------------------------------------------------


@dataclass(frozen=True)
class SynthCovariate:
    """Weather generator for one covariate: mean curve plus random modes.

    With ``target_cumulative`` the generated curves describe the cumulative
    series; the emitted raw samples are their first differences, so the full
    backward-window transform reproduces the curves.
    """

    name: str
    mean: object
    modes: tuple  # of (amplitude, curve description)
    cadence: str = "daily"
    target_cumulative: bool = False

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple((float(a), c) for a, c in self.modes))


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic synthetic-panel recipe with known ground truth."""

    n_provinces: int
    n_years: int
    base_year: int
    season_start: str
    season_end: str
    season_label: str
    covariates: tuple
    gamma: dict          # covariate name -> curve description
    beta: tuple
    alpha_mean: float
    alpha_sd: float
    noise_sd: float
    seed: int
    scenario: dict = field(default_factory=dict)
    fit_config: dict | None = None

    def __post_init__(self):
        if self.n_provinces < 1 or self.n_years < 1:
            raise ConfigError("need at least one province and one year")
        if self.noise_sd < 0:
            raise ConfigError(f"noise_sd must be >= 0, got {self.noise_sd}")
        object.__setattr__(self, "covariates", tuple(self.covariates))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))

    @property
    def domain(self) -> SeasonDomain:
        return season_domain(self.season_start, self.season_end, self.season_label)


@dataclass
class SyntheticData:
    yield_panel: YieldPanel
    raw_panels: dict
    production: np.ndarray
    area: np.ndarray
    truth: dict


def generate_synthetic(spec: SynthSpec) -> SyntheticData:
    """Generate balanced panels plus a truth record of every generating quantity."""
    domain = spec.domain
    rng = np.random.Generator(np.random.Philox(spec.seed))
    provinces = [f"P{k + 1:03d}" for k in range(spec.n_provinces)]
    years = list(range(spec.base_year, spec.base_year + spec.n_years))
    n_cells = spec.n_provinces * spec.n_years

    alpha = rng.normal(spec.alpha_mean, spec.alpha_sd, spec.n_provinces)

    raw_panels = {}
    contributions = np.zeros(n_cells)
    mode_integrals = {}
    for cov in spec.covariates:
        dt = 1.0 / HOURS_PER_DAY if cov.cadence == "hourly" else 1.0
        n_samples = int(round(domain.t_end / dt))
        times = np.arange(n_samples) * dt
        mean_values = eval_curve(cov.mean, times, domain)
        amps = np.array([a for a, _ in cov.modes])
        mode_values = np.vstack([eval_curve(c, times, domain) for _, c in cov.modes])
        z = rng.standard_normal((n_cells, len(cov.modes)))
        curves = mean_values + (z * amps) @ mode_values
        raw_values = np.diff(curves, prepend=0.0, axis=1) if cov.target_cumulative else curves
        raw_panels[cov.name] = RawSeriesPanel(
            covariate_name=cov.name,
            cadence=cov.cadence,
            values=raw_values,
            provinces=list(provinces),
            years=list(years),
            domain=domain,
        )
        gamma_descr = spec.gamma.get(cov.name)
        integrals = []
        if gamma_descr is not None:
            z_centered = z - z.mean(axis=0)
            for amp, mode_descr in cov.modes:
                integral = fine_quadrature(
                    lambda t: eval_curve(gamma_descr, t, domain) * eval_curve(mode_descr, t, domain),
                    domain.t_start,
                    domain.t_end,
                )
                integrals.append(integral)
            contributions = contributions + (z_centered * amps) @ np.asarray(integrals)
        mode_integrals[cov.name] = integrals

    rel_years = np.arange(spec.n_years, dtype=float)
    trend = sum(b * rel_years ** (l + 1) for l, b in enumerate(spec.beta))
    noise = rng.normal(0.0, spec.noise_sd, n_cells) if spec.noise_sd > 0 else np.zeros(n_cells)
    y_true = (
        np.repeat(alpha, spec.n_years)
        + np.tile(trend, spec.n_provinces)
        + contributions
        + noise
    )

    area = np.ones((spec.n_provinces, spec.n_years))
    production = np.exp(y_true).reshape(spec.n_provinces, spec.n_years) * area
    y_panel = np.log(production / area)
    yield_panel = YieldPanel(provinces=provinces, years=years, y=y_panel)

    truth = {
        "seed": spec.seed,
        "season": {"start": spec.season_start, "end": spec.season_end, "t_end": domain.t_end},
        "base_year": spec.base_year,
        "alpha": {prov: float(a) for prov, a in zip(provinces, alpha)},
        "beta": list(spec.beta),
        "noise_sd": spec.noise_sd,
        "gamma": {name: descr for name, descr in spec.gamma.items()},
        "mode_integrals": {name: [float(v) for v in vals] for name, vals in mode_integrals.items()},
        "scenario": _scenario_oracle(spec, domain),
    }
    return SyntheticData(
        yield_panel=yield_panel,
        raw_panels=raw_panels,
        production=production,
        area=area,
        truth=truth,
    )


def _scenario_oracle(spec: SynthSpec, domain: SeasonDomain) -> dict | None:
    if not spec.scenario:
        return None
    sc = dict(spec.scenario)
    gamma_descr = spec.gamma[sc["covariate"]]
    t0, t1 = float(sc["t0"]), float(sc["t1"])
    if sc.get("kind", "temperature_step") == "temperature_step":
        integral = fine_quadrature(lambda t: eval_curve(gamma_descr, t, domain), t0, t1)
    else:
        d = t1 - t0
        integral = fine_quadrature(
            lambda t: ((t - t0) / d * (1.0 - 1.0 / d) + 1.0 / d) * eval_curve(gamma_descr, t, domain),
            t0,
            t1,
        )
    sc["integral_value"] = integral
    sc["delta_log_yield"] = float(sc["delta"]) * integral
    sc["yield_ratio"] = math.exp(sc["delta_log_yield"])
    return sc


# -- shipped synthetic recipes -----------------------------------------------


def default_synth_spec(seed: int = 20240401) -> SynthSpec:
    """40 provinces x 60 years, three half-sine weather modes, smooth-bump
    coefficient curve, moderate noise."""
    modes = (
        (1.5, {"kind": "half_sine", "k": 1}),
        (1.0, {"kind": "half_sine", "k": 2}),
        (0.7, {"kind": "half_sine", "k": 3}),
    )
    gamma = [
        {"kind": "half_sine", "k": 1, "amplitude": -0.0012},
        {"kind": "half_sine", "k": 2, "amplitude": -0.0004},
    ]
    fit_config = {
        "trend_degree": 2,
        "delta": 0.9,
        "quantiles": [0.1, 0.9],
        "covariates": [
            {
                "name": "temperature",
                "smoothing_basis": {"kind": "fourier", "nbasis": 25},
                "harmonic_basis": {"kind": "spline", "nbasis": 8, "order": 4},
                "window": None,
            }
        ],
    }
    return SynthSpec(
        n_provinces=40,
        n_years=60,
        base_year=1952,
        season_start="02-01",
        season_end="06-30",
        season_label="synthetic Feb-Jun",
        covariates=(
            SynthCovariate(
                name="temperature",
                mean=[{"kind": "const", "value": 10.0}, {"kind": "half_sine", "k": 1, "amplitude": 8.0}],
                modes=modes,
            ),
        ),
        gamma={"temperature": gamma},
        beta=(0.02, -3e-4),
        alpha_mean=8.0,
        alpha_sd=0.3,
        noise_sd=0.03,
        seed=seed,
        scenario={"kind": "temperature_step", "covariate": "temperature", "delta": 1.0, "t0": 37.5, "t1": 112.5},
        fit_config=fit_config,
    )


def _share_modes(domain: SeasonDomain, nbasis: int, shares, scale: float = 3.0):
    """Orthonormal periodic spline modes with amplitudes giving the variance shares."""
    curves = periodic_spline_modes(domain, nbasis=nbasis, n_modes=len(shares))
    return tuple((scale * math.sqrt(share), curve) for share, curve in zip(shares, curves))


def maize_shaped_synth_spec(seed: int = 7101) -> SynthSpec:
    """79 provinces x 72 years on the Apr-Oct season; six spline-space weather
    modes with variance shares arranged so delta = 0.9 retains five."""
    domain = season_domain("04-01", "10-31")
    modes = _share_modes(domain, nbasis=7, shares=(0.30, 0.22, 0.16, 0.13, 0.12, 0.07))
    gamma_curve = dict(modes[0][1])
    gamma_curve["amplitude"] = -0.05
    gamma = [gamma_curve]
    fit_config = {
        "trend_degree": 2,
        "delta": 0.9,
        "quantiles": [0.1, 0.9],
        "covariates": [
            {
                "name": "temperature",
                "smoothing_basis": {"kind": "fourier", "nbasis": 51},
                "harmonic_basis": {"kind": "spline", "nbasis": 7, "order": 4},
                "window": None,
            }
        ],
    }
    return SynthSpec(
        n_provinces=79,
        n_years=72,
        base_year=1952,
        season_start="04-01",
        season_end="10-31",
        season_label="maize Apr-Oct",
        covariates=(
            SynthCovariate(
                name="temperature",
                mean=[{"kind": "const", "value": 16.0}, {"kind": "half_sine", "k": 1, "amplitude": 10.0}],
                modes=modes,
            ),
        ),
        gamma={"temperature": gamma},
        beta=(0.02, -3e-4),
        alpha_mean=8.3,
        alpha_sd=0.3,
        noise_sd=0.03,
        seed=seed,
        scenario={"kind": "temperature_step", "covariate": "temperature", "delta": 1.0, "t0": 61.0, "t1": 153.0},
        fit_config=fit_config,
    )


# -- synth spec JSON and corpus writing ----------------------------------------

_SYNTH_KEYS = {
    "schema_version",
    "kind",
    "n_provinces",
    "n_years",
    "base_year",
    "season",
    "covariates",
    "gamma",
    "beta",
    "alpha_mean",
    "alpha_sd",
    "noise_sd",
    "seed",
    "scenario",
    "fit_config",
}
_SYNTH_REQUIRED = {
    "schema_version",
    "n_provinces",
    "n_years",
    "base_year",
    "season",
    "covariates",
    "gamma",
    "beta",
    "alpha_mean",
    "alpha_sd",
    "noise_sd",
    "seed",
}


def synth_spec_from_doc(doc: dict) -> SynthSpec:
    """Strict parse of a synthetic-spec JSON document."""
    unknown = set(doc) - _SYNTH_KEYS
    if unknown:
        raise ConfigError(f"synth spec: unknown fields {sorted(unknown)}")
    missing = _SYNTH_REQUIRED - set(doc)
    if missing:
        raise ConfigError(f"synth spec: missing fields {sorted(missing)}")
    if doc["schema_version"] != 1:
        raise ConfigError(f"synth spec: unsupported schema_version {doc['schema_version']!r}")
    season = doc["season"]
    covariates = []
    for cdoc in doc["covariates"]:
        unknown = set(cdoc) - {"name", "cadence", "mean", "modes", "target_cumulative"}
        if unknown:
            raise ConfigError(f"synth covariate: unknown fields {sorted(unknown)}")
        covariates.append(
            SynthCovariate(
                name=cdoc["name"],
                mean=cdoc["mean"],
                modes=tuple((m[0], m[1]) for m in cdoc["modes"]),
                cadence=cdoc.get("cadence", "daily"),
                target_cumulative=bool(cdoc.get("target_cumulative", False)),
            )
        )
    return SynthSpec(
        n_provinces=int(doc["n_provinces"]),
        n_years=int(doc["n_years"]),
        base_year=int(doc["base_year"]),
        season_start=season["start"],
        season_end=season["end"],
        season_label=season.get("label", ""),
        covariates=tuple(covariates),
        gamma=dict(doc["gamma"]),
        beta=tuple(doc["beta"]),
        alpha_mean=float(doc["alpha_mean"]),
        alpha_sd=float(doc["alpha_sd"]),
        noise_sd=float(doc["noise_sd"]),
        seed=int(doc["seed"]),
        scenario=dict(doc.get("scenario") or {}),
        fit_config=doc.get("fit_config"),
    )


def load_synth_spec(path) -> SynthSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise MissingArtifactError(f"synth spec not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return synth_spec_from_doc(doc)


def builtin_synth_spec(name: str) -> SynthSpec:
    factories = {
        "default": default_synth_spec,
        "maize": maize_shaped_synth_spec,
        "wheat": wheat_shaped_synth_spec,
    }
    try:
        return factories[name]()
    except KeyError:
        raise ConfigError(
            f"unknown builtin synth spec {name!r} (choose from {sorted(factories)})"
        ) from None


def write_corpus(data: SyntheticData, spec: SynthSpec, out_dir) -> dict:
    """Write yields, weather files, truth.json and a ready-to-run fit config.

    Returns the written paths keyed by role.
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    yields_path = os.path.join(out_dir, "yields.csv")
    write_yield_csv(
        data.yield_panel.provinces,
        data.yield_panel.years,
        data.production,
        data.area,
        yields_path,
    )
    paths["yields"] = yields_path
    for name, raw in data.raw_panels.items():
        csv_path = os.path.join(out_dir, f"{name}.csv")
        write_weather_csv(raw, csv_path, spec.season_start, spec.season_end)
        paths[f"weather:{name}"] = csv_path

    truth_path = os.path.join(out_dir, "truth.json")
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(data.truth, fh, sort_keys=True, indent=2)
        fh.write("\n")
    paths["truth"] = truth_path

    if spec.fit_config is not None:
        fc = spec.fit_config
        config = {
            "schema_version": 1,
            "crop": spec.season_label or "synthetic",
            "season": {"start": spec.season_start, "end": spec.season_end},
            "base_year": spec.base_year,
            "trend_degree": fc.get("trend_degree", 2),
            "delta": fc.get("delta", 0.9),
            "quantiles": fc.get("quantiles", [0.1, 0.9]),
            "covariates": fc["covariates"],
            "bootstrap": {"replicas": 200, "level": 0.95, "seed": spec.seed},
            "paths": {
                "yields": "yields.csv",
                "weather": {
                    name: {"csv": f"{name}.csv", "meta": f"{name}.csv.meta.json"}
                    for name in data.raw_panels
                },
                "output_dir": ".",
            },
        }
        config_path = os.path.join(out_dir, "config.json")
        with open(config_path, "w", encoding="utf-8") as fh:
            json.dump(config, fh, sort_keys=True, indent=2)
            fh.write("\n")
        paths["config"] = config_path
    return paths


def wheat_shaped_synth_spec(seed: int = 7102) -> SynthSpec:
    """68 provinces x 72 years on the Feb-Jun season; temperature engineered
    for four retained components, cumulative precipitation for two."""
    domain = season_domain("02-01", "06-30")
    temp_modes = _share_modes(domain, nbasis=6, shares=(0.35, 0.25, 0.18, 0.15, 0.07))
    prec_modes = _share_modes(domain, nbasis=6, shares=(0.60, 0.33, 0.07), scale=25.0)
    fit_config = {
        "trend_degree": 2,
        "delta": 0.9,
        "quantiles": [0.1, 0.9],
        "covariates": [
            {
                "name": "temperature",
                "smoothing_basis": {"kind": "fourier", "nbasis": 51},
                "harmonic_basis": {"kind": "spline", "nbasis": 6, "order": 4},
                "window": None,
            },
            {
                "name": "precipitation",
                "smoothing_basis": {"kind": "polygonal", "nbasis": 76},
                "harmonic_basis": {"kind": "spline", "nbasis": 6, "order": 4},
                "window": "full",
            },
        ],
    }
    return SynthSpec(
        n_provinces=68,
        n_years=72,
        base_year=1952,
        season_start="02-01",
        season_end="06-30",
        season_label="wheat Feb-Jun",
        covariates=(
            SynthCovariate(
                name="temperature",
                mean=[{"kind": "const", "value": 9.0}, {"kind": "half_sine", "k": 1, "amplitude": 7.0}],
                modes=temp_modes,
            ),
            SynthCovariate(
                name="precipitation",
                mean=[{"kind": "poly", "coeffs": [0.0, 300.0]}],
                modes=prec_modes,
                target_cumulative=True,
            ),
        ),
        gamma={
            "temperature": [{"kind": "half_sine", "k": 1, "amplitude": -0.0008}],
            "precipitation": [{"kind": "half_sine", "k": 1, "amplitude": 2.0e-5}],
        },
        beta=(0.02, -3e-4),
        alpha_mean=7.9,
        alpha_sd=0.3,
        noise_sd=0.03,
        seed=seed,
        scenario={"kind": "temperature_step", "covariate": "temperature", "delta": 1.0, "t0": 28.0, "t1": 120.0},
        fit_config=fit_config,
    )

"""Reduced panel regression: design assembly, OLS / quantile / quantile-average
fits, coefficient-curve reconstruction and model persistence.

The design has one indicator column per province (no global intercept), the
polynomial year-trend columns (i - i0)^l, then the fPCA scores of every
covariate in component order.  Rows are province-major, year-minor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import qr as scipy_qr

from .basis import SeasonDomain, basis_from_config
from .errors import (
    AlignmentError,
    ConfigError,
    SingularityError,
    StateError,
    UnknownNameError,
)
from .fdata import center, smooth, window_transform
from .fpca import FpcaResult, fit_fpca
from .quantile import solve_qr

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CovariateSpec:
    """Configuration of one functional covariate."""

    name: str
    smoothing_basis: dict
    harmonic_basis: dict
    window: int | str | None = None


@dataclass(frozen=True)
class ModelSpec:
    """Everything the estimation pipeline needs besides the data."""

    season: SeasonDomain
    covariates: tuple
    trend_degree: int = 2
    delta: float = 0.9
    quantiles: tuple = (0.1, 0.9)
    qa_offsets: tuple = (-0.05, -0.025, 0.025, 0.05)
    qa_include_center: bool = False
    base_year: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "covariates", tuple(self.covariates))
        object.__setattr__(self, "quantiles", tuple(float(q) for q in self.quantiles))
        object.__setattr__(self, "qa_offsets", tuple(float(o) for o in self.qa_offsets))
        if self.trend_degree < 0:
            raise ConfigError(f"trend degree must be >= 0, got {self.trend_degree}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        for tau in self.quantiles:
            if not (0.0 < tau < 1.0):
                raise ConfigError(f"quantile {tau} outside (0, 1)")
            for off in self.qa_offsets:
                if not (0.0 < tau + off < 1.0):
                    raise ConfigError(
                        f"quantile neighborhood point {tau + off} outside (0, 1)"
                    )
        names = [c.name for c in self.covariates]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate covariate names in {names}")


@dataclass
class YieldPanel:
    """Balanced panel of log yields; ``y[j, i]`` is province j, year i."""

    provinces: list
    years: list
    y: np.ndarray
    dropped: list = field(default_factory=list)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.shape != (len(self.provinces), len(self.years)):
            raise AlignmentError(
                f"yield matrix shape {self.y.shape} does not match "
                f"{len(self.provinces)} provinces x {len(self.years)} years"
            )
        if not np.all(np.isfinite(self.y)):
            raise ConfigError("log yields must be finite")
        if len(self.years) >= 2 and not np.all(np.diff(self.years) == 1):
            raise ConfigError("years must be contiguous")

    @property
    def n_cells(self) -> int:
        return self.y.size

    def response(self) -> np.ndarray:
        """Flat response vector in canonical (province-major) row order."""
        return self.y.reshape(-1)

    def take_provinces(self, indices) -> "YieldPanel":
        return replace(
            self,
            provinces=[self.provinces[j] for j in indices],
            y=self.y[list(indices)],
            dropped=[],
        )


@dataclass
class Design:
    X: np.ndarray
    response: np.ndarray
    columns: list
    n_provinces: int
    trend_degree: int
    score_counts: dict

    @property
    def n_parameters(self) -> int:
        return self.X.shape[1]

    def split_coef(self, coef: np.ndarray):
        """(alpha, beta, per-covariate gamma scores) blocks of a coefficient vector."""
        m, b = self.n_provinces, self.trend_degree
        alpha = coef[:m]
        beta = coef[m:m + b]
        gammas = {}
        start = m + b
        for name, l in self.score_counts.items():
            gammas[name] = coef[start:start + l]
            start += l
        return alpha, beta, gammas


def build_design(spec: ModelSpec, panel: YieldPanel, fpca_results: dict) -> Design:
    """Assemble the regression design and response in canonical row order."""
    m = len(panel.provinces)
    n_years = len(panel.years)
    n = m * n_years
    base_year = spec.base_year if spec.base_year is not None else panel.years[0]

    blocks = [np.kron(np.eye(m), np.ones((n_years, 1)))]
    columns = [f"alpha[{p}]" for p in panel.provinces]
    rel_years = np.asarray(panel.years, dtype=float) - base_year
    for l in range(1, spec.trend_degree + 1):
        blocks.append(np.tile(rel_years ** l, m)[:, None])
        columns.append(f"beta[{l}]")

    score_counts = {}
    for cov in spec.covariates:
        try:
            res = fpca_results[cov.name]
        except KeyError:
            raise UnknownNameError(f"no fPCA result for covariate {cov.name!r}") from None
        if res.scores.shape[0] != n:
            raise AlignmentError(
                f"covariate {cov.name!r} has {res.scores.shape[0]} score rows, "
                f"yield panel has {n} cells"
            )
        blocks.append(res.scores)
        columns.extend(f"gamma[{cov.name}][{s + 1}]" for s in range(res.n_retained))
        score_counts[cov.name] = res.n_retained

    return Design(
        X=np.hstack(blocks),
        response=panel.response(),
        columns=columns,
        n_provinces=m,
        trend_degree=spec.trend_degree,
        score_counts=score_counts,
    )


def _check_full_rank(X: np.ndarray, columns) -> None:
    r = scipy_qr(X, mode="r", pivoting=True)
    diag = np.abs(np.diag(r[0]))
    tol = max(X.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < X.shape[1]:
        dependent = [columns[j] for j in sorted(r[1][rank:])]
        raise SingularityError(f"design is rank deficient; dependent columns: {dependent}")


def fit_ols(X: np.ndarray, response: np.ndarray, columns=None):
    """OLS coefficients, residuals and fit diagnostics.

    Adjusted R-squared uses n - p with p counting every estimated parameter,
    fixed effects included.
    """
    columns = columns if columns is not None else [f"x{j}" for j in range(X.shape[1])]
    _check_full_rank(X, columns)
    coef, _, _, _ = np.linalg.lstsq(X, response, rcond=None)
    fitted = X @ coef
    residuals = response - fitted
    n, p = X.shape
    rss = float(residuals @ residuals)
    tss = float(np.sum((response - response.mean()) ** 2))
    if tss > 0 and n > p:
        adjusted_r2 = 1.0 - (rss / (n - p)) / (tss / (n - 1))
    else:
        adjusted_r2 = float("nan")
    sd_f, sd_y = float(np.std(fitted)), float(np.std(response))
    if sd_f > 0 and sd_y > 0:
        prediction_correlation = float(np.corrcoef(fitted, response)[0, 1])
    else:
        prediction_correlation = float("nan")
    diagnostics = {
        "adjusted_r2": adjusted_r2,
        "prediction_correlation": prediction_correlation,
    }
    return coef, residuals, diagnostics


def fit_qr(X: np.ndarray, response: np.ndarray, tau: float) -> np.ndarray:
    """Quantile regression coefficients at level tau."""
    if not (0.0 < tau < 1.0):
        raise ConfigError(f"tau must lie in (0, 1), got {tau}")
    return solve_qr(X, response, tau).coef


def fit_qa(
    X: np.ndarray,
    response: np.ndarray,
    tau: float,
    offsets,
    include_center: bool = False,
) -> np.ndarray:
    """Quantile-average estimator: mean of QR fits over the tau neighborhood.

    The neighborhood is the offset quantiles in their listed order, with tau
    itself appended when ``include_center`` is set; the result is the exact
    arithmetic mean of the constituent QR coefficient vectors.
    """
    taus = [tau + o for o in offsets]
    if include_center or not taus:
        taus.append(tau)
    fits = []
    for rho in taus:
        if not (0.0 < rho < 1.0):
            raise ConfigError(f"neighborhood quantile {rho} outside (0, 1)")
        try:
            fits.append(fit_qr(X, response, rho))
        except Exception as exc:
            exc.args = (f"QA neighborhood quantile {rho:g}: {exc}",)
            raise
    return np.mean(np.vstack(fits), axis=0)


def _format_tau(tau: float) -> str:
    return f"{tau:g}"


def estimator_tags(spec: ModelSpec):
    tags = ["ols"]
    for tau in spec.quantiles:
        tags.append(f"qr_{_format_tau(tau)}")
    for tau in spec.quantiles:
        tags.append(f"qa_{_format_tau(tau)}")
    return tags


def parse_tag(tag: str):
    """Split an estimator tag into (kind, tau)."""
    if tag == "ols":
        return "ols", None
    for kind in ("qr", "qa"):
        if tag.startswith(kind + "_"):
            try:
                tau = float(tag[len(kind) + 1:])
            except ValueError:
                raise UnknownNameError(f"malformed estimator tag {tag!r}") from None
            if not (0.0 < tau < 1.0):
                raise UnknownNameError(f"estimator tag {tag!r} has quantile outside (0, 1)")
            return kind, tau
    raise UnknownNameError(f"unknown estimator tag {tag!r}")


@dataclass
class CovariateModel:
    spec: CovariateSpec
    smoothing_basis: object
    mean_coefs: np.ndarray
    fpca: FpcaResult


@dataclass
class EstimatorFit:
    tag: str
    alpha: np.ndarray
    beta: np.ndarray
    gamma_scores: dict
    residuals: np.ndarray | None = None
    fitted: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


@dataclass
class FitResult:
    """Fitted model: per-covariate fPCA machinery plus per-estimator blocks."""

    spec: ModelSpec
    provinces: list
    years: list
    covariates: dict
    fits: dict
    columns: list
    config_echo: dict | None = None

    def covariate(self, name: str) -> CovariateModel:
        try:
            return self.covariates[name]
        except KeyError:
            raise UnknownNameError(f"unknown covariate {name!r}") from None

    def fit(self, tag: str) -> EstimatorFit:
        try:
            return self.fits[tag]
        except KeyError:
            raise UnknownNameError(f"unknown estimator tag {tag!r}") from None

    def gamma_curve_coefs(self, name: str, tag: str) -> np.ndarray:
        """Coefficients of the reconstructed curve on the harmonic basis."""
        cov = self.covariate(name)
        scores = self.fit(tag).gamma_scores[name]
        return scores @ cov.fpca.retained_eigenfunctions

    def reconstruct_gamma(self, name: str, tag: str, times) -> np.ndarray:
        """Values of the estimated coefficient curve on a time grid."""
        cov = self.covariate(name)
        return cov.fpca.harmonic_basis.evaluate(times) @ self.gamma_curve_coefs(name, tag)

    @property
    def n_parameters(self) -> int:
        return len(self.columns)


def smooth_covariates(spec: ModelSpec, raw_panels: dict) -> dict:
    """Window-transform and smooth every configured covariate.

    Returns uncentered functional panels keyed by covariate name.
    """
    smoothed = {}
    for cov in spec.covariates:
        try:
            raw = raw_panels[cov.name]
        except KeyError:
            raise UnknownNameError(f"no weather panel for covariate {cov.name!r}") from None
        if cov.window is not None:
            raw = window_transform(raw, cov.window)
        basis = basis_from_config(cov.smoothing_basis, spec.season)
        smoothed[cov.name] = smooth(raw, basis)
    return smoothed


def fit_from_smoothed(
    spec: ModelSpec,
    panel: YieldPanel,
    smoothed: dict,
    tags=None,
    config_echo: dict | None = None,
) -> FitResult:
    """Center, reduce and estimate, returning the assembled fit."""
    covariates = {}
    fpca_results = {}
    for cov in spec.covariates:
        fpanel = smoothed[cov.name]
        if fpanel.centered:
            raise StateError(f"smoothed panel for {cov.name!r} is already centered")
        if list(fpanel.provinces) != list(panel.provinces) or list(fpanel.years) != list(panel.years):
            raise AlignmentError(
                f"covariate {cov.name!r} cells do not match the yield panel"
            )
        harmonic = basis_from_config(cov.harmonic_basis, spec.season)
        res = fit_fpca(center(fpanel), harmonic, spec.delta)
        fpca_results[cov.name] = res
        covariates[cov.name] = CovariateModel(
            spec=cov,
            smoothing_basis=fpanel.basis,
            mean_coefs=fpanel.mean_coefs.copy(),
            fpca=res,
        )

    design = build_design(spec, panel, fpca_results)
    if tags is None:
        tags = estimator_tags(spec)

    fits = {}
    for tag in tags:
        kind, tau = parse_tag(tag)
        diagnostics = {}
        if kind == "ols":
            coef, residuals, diagnostics = fit_ols(design.X, design.response, design.columns)
        elif kind == "qr":
            coef = fit_qr(design.X, design.response, tau)
            residuals = design.response - design.X @ coef
        else:
            coef = fit_qa(
                design.X, design.response, tau, spec.qa_offsets, spec.qa_include_center
            )
            residuals = design.response - design.X @ coef
        alpha, beta, gammas = design.split_coef(coef)
        fits[tag] = EstimatorFit(
            tag=tag,
            alpha=alpha,
            beta=beta,
            gamma_scores=gammas,
            residuals=residuals,
            fitted=design.response - residuals,
            diagnostics=diagnostics,
        )

    return FitResult(
        spec=spec,
        provinces=list(panel.provinces),
        years=list(panel.years),
        covariates=covariates,
        fits=fits,
        columns=design.columns,
        config_echo=config_echo,
    )


def fit_model(
    spec: ModelSpec,
    panel: YieldPanel,
    raw_panels: dict,
    tags=None,
    config_echo: dict | None = None,
) -> FitResult:
    """Full pipeline from raw weather panels to a fitted model."""
    smoothed = smooth_covariates(spec, raw_panels)
    return fit_from_smoothed(spec, panel, smoothed, tags=tags, config_echo=config_echo)


# -- persistence -------------------------------------------------------------


def _floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).reshape(-1)]


def _float_rows(a) -> list:
    return [[float(v) for v in row] for row in np.asarray(a, dtype=float)]


def model_document(fit: FitResult) -> dict:
    """JSON-serializable document with the stable persistence schema."""
    spec = fit.spec
    covariates = {}
    for name, cov in fit.covariates.items():
        covariates[name] = {
            "window": cov.spec.window,
            "smoothing_basis": cov.smoothing_basis.to_config(),
            "harmonic_basis": cov.fpca.harmonic_basis.to_config(),
            "mean_coefs": _floats(cov.mean_coefs),
            "eigenvalues": _floats(cov.fpca.eigenvalues),
            "variance_fraction": _floats(cov.fpca.variance_fraction),
            "eigenfunctions": _float_rows(cov.fpca.eigenfunctions),
            "n_retained": int(cov.fpca.n_retained),
        }
    estimators = {}
    for tag, efit in fit.fits.items():
        estimators[tag] = {
            "alpha": _floats(efit.alpha),
            "beta": _floats(efit.beta),
            "gamma_scores": {k: _floats(v) for k, v in efit.gamma_scores.items()},
            "diagnostics": {k: float(v) for k, v in efit.diagnostics.items()},
        }
    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "kind": "cropfda-model",
        "season": {"t_end": float(spec.season.t_end), "label": spec.season.label},
        "base_year": spec.base_year,
        "trend_degree": spec.trend_degree,
        "delta": spec.delta,
        "quantiles": list(spec.quantiles),
        "qa_offsets": list(spec.qa_offsets),
        "qa_include_center": spec.qa_include_center,
        "provinces": list(fit.provinces),
        "years": {"first": int(fit.years[0]), "count": len(fit.years)},
        "columns": list(fit.columns),
        "covariate_order": [c.name for c in spec.covariates],
        "covariates": covariates,
        "estimators": estimators,
        "config": fit.config_echo,
    }


def dump_model_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_model(fit: FitResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_model_json(model_document(fit)))


def load_model(path) -> FitResult:
    """Rebuild a FitResult from its persisted document.

    Residuals and fitted values are not persisted; reloaded estimator fits
    carry coefficients, scores and diagnostics only.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("kind") != "cropfda-model" or doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise ConfigError(f"{path} is not a cropfda model document (schema {MODEL_SCHEMA_VERSION})")

    season = SeasonDomain(doc["season"]["t_end"], doc["season"].get("label", ""))
    cov_specs = []
    covariates = {}
    order = doc.get("covariate_order", list(doc["covariates"]))
    for name in order:
        cdoc = doc["covariates"][name]
        cov_spec = CovariateSpec(
            name=name,
            smoothing_basis=cdoc["smoothing_basis"],
            harmonic_basis=cdoc["harmonic_basis"],
            window=cdoc.get("window"),
        )
        cov_specs.append(cov_spec)
        harmonic = basis_from_config(cdoc["harmonic_basis"], season)
        eigenfunctions = np.asarray(cdoc["eigenfunctions"], dtype=float)
        eigenvalues = np.asarray(cdoc["eigenvalues"], dtype=float)
        covariates[name] = CovariateModel(
            spec=cov_spec,
            smoothing_basis=basis_from_config(cdoc["smoothing_basis"], season),
            mean_coefs=np.asarray(cdoc["mean_coefs"], dtype=float),
            fpca=FpcaResult(
                harmonic_basis=harmonic,
                eigenfunctions=eigenfunctions,
                eigenvalues=eigenvalues,
                variance_fraction=np.asarray(cdoc["variance_fraction"], dtype=float),
                n_retained=int(cdoc["n_retained"]),
                scores=np.empty((0, int(cdoc["n_retained"]))),
                delta=float(doc["delta"]),
            ),
        )

    spec = ModelSpec(
        season=season,
        covariates=tuple(cov_specs),
        trend_degree=int(doc["trend_degree"]),
        delta=float(doc["delta"]),
        quantiles=tuple(doc["quantiles"]),
        qa_offsets=tuple(doc["qa_offsets"]),
        qa_include_center=bool(doc["qa_include_center"]),
        base_year=doc["base_year"],
    )
    years = list(range(doc["years"]["first"], doc["years"]["first"] + doc["years"]["count"]))
    fits = {}
    for tag, edoc in doc["estimators"].items():
        fits[tag] = EstimatorFit(
            tag=tag,
            alpha=np.asarray(edoc["alpha"], dtype=float),
            beta=np.asarray(edoc["beta"], dtype=float),
            gamma_scores={k: np.asarray(v, dtype=float) for k, v in edoc["gamma_scores"].items()},
            diagnostics=dict(edoc.get("diagnostics", {})),
        )
    return FitResult(
        spec=spec,
        provinces=list(doc["provinces"]),
        years=years,
        covariates=covariates,
        fits=fits,
        columns=list(doc["columns"]),
        config_echo=doc.get("config"),
    )

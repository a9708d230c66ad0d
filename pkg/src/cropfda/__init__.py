"""Scalar-on-function regression toolkit for panel crop-yield data.

Pipeline: smooth sampled weather series onto a function basis, reduce them
with functional PCA, regress log yields on the component scores together with
province fixed effects and a polynomial year trend (OLS, quantile and
quantile-average estimators), then translate the fitted coefficient curves
into scenario yield effects with province-cluster bootstrap bands.
"""

from .bands import BandResult, bootstrap_bands
from .basis import (
    BasisSystem,
    FourierBasis,
    PolygonalBasis,
    SeasonDomain,
    SplineBasis,
    basis_from_config,
)
from .effects import (
    ScenarioResult,
    ScenarioSpec,
    precipitation_ramp_effect,
    scenario_effect,
    temperature_step_effect,
)
from .estimator import (
    CovariateSpec,
    FitResult,
    ModelSpec,
    YieldPanel,
    build_design,
    fit_model,
    fit_ols,
    fit_qa,
    fit_qr,
    load_model,
    save_model,
)
from .fdata import FULL_WINDOW, FunctionalPanel, RawSeriesPanel, center, smooth, window_transform
from .fpca import FpcaResult, fit_fpca, project_scores
from .ingest import (
    SynthCovariate,
    SynthSpec,
    generate_synthetic,
    load_weather_panel,
    load_yield_panel,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSystem",
    "FourierBasis",
    "SplineBasis",
    "PolygonalBasis",
    "SeasonDomain",
    "basis_from_config",
    "RawSeriesPanel",
    "FunctionalPanel",
    "smooth",
    "center",
    "window_transform",
    "FULL_WINDOW",
    "FpcaResult",
    "fit_fpca",
    "project_scores",
    "ModelSpec",
    "CovariateSpec",
    "YieldPanel",
    "build_design",
    "fit_ols",
    "fit_qr",
    "fit_qa",
    "fit_model",
    "FitResult",
    "save_model",
    "load_model",
    "BandResult",
    "bootstrap_bands",
    "ScenarioSpec",
    "ScenarioResult",
    "temperature_step_effect",
    "precipitation_ramp_effect",
    "scenario_effect",
    "SynthSpec",
    "SynthCovariate",
    "generate_synthetic",
    "load_yield_panel",
    "load_weather_panel",
    "__version__",
]

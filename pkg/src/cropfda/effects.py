"""Scenario calculators: yield impact of temperature steps and precipitation
ramps applied to a fitted coefficient curve.

A temperature step adds delta_T degrees uniformly on [t0, t1], so the log-yield
change is delta_T times the plain integral of the coefficient curve over the
window.  A precipitation ramp spreads delta_P millimetres evenly over [t0, t1];
on the cumulative precipitation curve that is a linear perturbation rising
from delta_P/(t1-t0) to delta_P, hence the ramp-weighted integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, IntervalError
from .estimator import FitResult

TEMPERATURE_STEP = "temperature_step"
PRECIPITATION_RAMP = "precipitation_ramp"


@dataclass(frozen=True)
class ScenarioSpec:
    """A weather perturbation applied to one covariate of a fitted model."""

    kind: str
    delta: float
    t0: float
    t1: float
    covariate: str
    estimator: str

    def __post_init__(self):
        if self.kind not in (TEMPERATURE_STEP, PRECIPITATION_RAMP):
            raise ConfigError(f"unknown scenario kind {self.kind!r}")
        if not math.isfinite(self.delta):
            raise ConfigError(f"scenario delta must be finite, got {self.delta}")


@dataclass(frozen=True)
class ScenarioResult:
    delta_log_yield: float
    yield_ratio: float
    integral_value: float


def _window_check(fit: FitResult, spec: ScenarioSpec) -> None:
    t_end = fit.spec.season.t_end
    if not (0.0 <= spec.t0 < spec.t1 <= t_end):
        raise IntervalError(
            f"scenario window [{spec.t0}, {spec.t1}] outside the season [0, {t_end}]"
        )


def temperature_step_effect(fit: FitResult, spec: ScenarioSpec) -> ScenarioResult:
    """Log-yield change of a +delta step on [t0, t1] of a plain covariate."""
    if spec.kind != TEMPERATURE_STEP:
        raise ConfigError(f"expected a {TEMPERATURE_STEP} scenario, got {spec.kind!r}")
    _window_check(fit, spec)
    cov = fit.covariate(spec.covariate)
    if cov.spec.window is not None:
        raise ConfigError(
            f"covariate {spec.covariate!r} is window-transformed; a step scenario "
            "applies to untransformed covariates only"
        )
    coefs = fit.gamma_curve_coefs(spec.covariate, spec.estimator)
    integral = cov.fpca.harmonic_basis.integrate(coefs, spec.t0, spec.t1, weight="constant")
    dy = spec.delta * integral
    return ScenarioResult(delta_log_yield=dy, yield_ratio=math.exp(dy), integral_value=integral)


def precipitation_ramp_effect(fit: FitResult, spec: ScenarioSpec) -> ScenarioResult:
    """Log-yield change of delta millimetres spread evenly over [t0, t1],
    applied to a cumulative (window-transformed) covariate."""
    if spec.kind != PRECIPITATION_RAMP:
        raise ConfigError(f"expected a {PRECIPITATION_RAMP} scenario, got {spec.kind!r}")
    _window_check(fit, spec)
    if spec.t1 - spec.t0 < 2.0:
        raise IntervalError(
            f"ramp window must span at least 2 days, got {spec.t1 - spec.t0}"
        )
    cov = fit.covariate(spec.covariate)
    if cov.spec.window is None:
        raise ConfigError(
            f"covariate {spec.covariate!r} is not window-transformed; a ramp scenario "
            "applies to cumulative covariates only"
        )
    coefs = fit.gamma_curve_coefs(spec.covariate, spec.estimator)
    integral = cov.fpca.harmonic_basis.integrate(coefs, spec.t0, spec.t1, weight="ramp")
    dy = spec.delta * integral
    return ScenarioResult(delta_log_yield=dy, yield_ratio=math.exp(dy), integral_value=integral)


def scenario_effect(fit: FitResult, spec: ScenarioSpec) -> ScenarioResult:
    if spec.kind == TEMPERATURE_STEP:
        return temperature_step_effect(fit, spec)
    return precipitation_ramp_effect(fit, spec)

"""Shared fixtures: a small synthetic panel and its fitted model."""

import numpy as np
import pytest

from cropfda.estimator import CovariateSpec, ModelSpec, fit_model, smooth_covariates
from cropfda.ingest import SynthCovariate, SynthSpec, generate_synthetic


# 11 x 7 keeps n * tau off the integer lattice for the default quantile
# neighborhoods, so small-sample QR optima are unique vertices.
def small_synth_spec(seed=1234, n_provinces=11, n_years=7, noise_sd=0.02):
    return SynthSpec(
        n_provinces=n_provinces,
        n_years=n_years,
        base_year=2000,
        season_start="02-01",
        season_end="06-30",
        season_label="test Feb-Jun",
        covariates=(
            SynthCovariate(
                name="temperature",
                mean=[{"kind": "const", "value": 10.0},
                      {"kind": "half_sine", "k": 1, "amplitude": 8.0}],
                modes=(
                    (1.5, {"kind": "half_sine", "k": 1}),
                    (1.0, {"kind": "half_sine", "k": 2}),
                ),
            ),
        ),
        gamma={"temperature": [{"kind": "half_sine", "k": 1, "amplitude": -0.0012}]},
        beta=(0.02, -3e-4),
        alpha_mean=8.0,
        alpha_sd=0.3,
        noise_sd=noise_sd,
        seed=seed,
        scenario={"kind": "temperature_step", "covariate": "temperature",
                  "delta": 1.0, "t0": 37.5, "t1": 112.5},
    )


def small_model_spec(quantiles=(0.1, 0.9)):
    return ModelSpec(
        season=small_synth_spec().domain,
        covariates=(
            CovariateSpec(
                name="temperature",
                smoothing_basis={"kind": "fourier", "nbasis": 15},
                harmonic_basis={"kind": "spline", "nbasis": 6, "order": 4},
            ),
        ),
        trend_degree=2,
        delta=0.9,
        quantiles=quantiles,
        base_year=2000,
    )


@pytest.fixture(scope="session")
def small_data():
    return generate_synthetic(small_synth_spec())


@pytest.fixture(scope="session")
def small_fit(small_data):
    spec = small_model_spec()
    return fit_model(spec, small_data.yield_panel, small_data.raw_panels)


@pytest.fixture(scope="session")
def small_smoothed(small_data):
    spec = small_model_spec()
    return spec, smooth_covariates(spec, small_data.raw_panels)


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)

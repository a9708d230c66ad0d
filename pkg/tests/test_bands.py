"""Tests for the province-cluster bootstrap bands."""

import numpy as np
import numpy.testing as npt
import pytest

from cropfda.bands import (
    BandResult,
    _gamma_curves,
    _resample,
    band_filename,
    bootstrap_bands,
    read_band_csv,
    write_band_csv,
)
from cropfda.errors import BootstrapError, ConfigError, CropFdaError
from cropfda.estimator import CovariateSpec, ModelSpec, smooth_covariates
from cropfda.ingest import generate_synthetic, periodic_spline_modes, synth_spec_from_doc


def in_span_spec(noise_sd=0.0, seed=91, n_provinces=9, n_years=6):
    """Synthetic spec whose weather modes and coefficient curve live exactly
    in the harmonic spline space, so a noise-free response sits in the model
    span for every resample."""
    modes = periodic_spline_modes(
        synth_spec_from_doc({
            "schema_version": 1, "n_provinces": 2, "n_years": 2, "base_year": 0,
            "season": {"start": "02-01", "end": "06-30"},
            "covariates": [], "gamma": {}, "beta": [0.0],
            "alpha_mean": 0.0, "alpha_sd": 0.0, "noise_sd": 0.0, "seed": 0,
        }).domain,
        nbasis=7,
    )
    share_amps = (1.4, 1.1, 0.9)
    gamma = [dict(modes[0], amplitude=-0.004), dict(modes[1], amplitude=0.002)]
    return synth_spec_from_doc({
        "schema_version": 1,
        "n_provinces": n_provinces, "n_years": n_years, "base_year": 2000,
        "season": {"start": "02-01", "end": "06-30"},
        "covariates": [{
            "name": "temperature",
            "mean": [{"kind": "const", "value": 12.0}],
            "modes": [[a, m] for a, m in zip(share_amps, modes[:3])],
        }],
        "gamma": {"temperature": gamma},
        "beta": [0.02, -2e-4],
        "alpha_mean": 8.0, "alpha_sd": 0.3,
        "noise_sd": noise_sd, "seed": seed,
    })


def in_span_model_spec(domain):
    return ModelSpec(
        season=domain,
        covariates=(CovariateSpec(
            "temperature",
            {"kind": "spline", "nbasis": 7, "order": 4},
            {"kind": "spline", "nbasis": 7, "order": 4},
        ),),
        trend_degree=2,
        quantiles=(),
        base_year=2000,
    )


@pytest.fixture(scope="module")
def zero_noise_inputs():
    spec = in_span_spec(noise_sd=0.0)
    data = generate_synthetic(spec)
    mspec = in_span_model_spec(spec.domain)
    smoothed = smooth_covariates(mspec, data.raw_panels)
    return mspec, data.yield_panel, smoothed


class TestBootstrapBands:
    def test_zero_noise_bands_collapse(self, zero_noise_inputs):
        mspec, panel, smoothed = zero_noise_inputs
        bands = bootstrap_bands(mspec, panel, smoothed, "ols", 40, 0.95, seed=3)
        band = bands["temperature"]
        assert np.max(band.upper - band.lower) < 1e-6
        assert np.all(band.lower <= band.upper)

    def test_deterministic_given_seed(self, zero_noise_inputs, tmp_path):
        mspec, panel, smoothed = zero_noise_inputs
        a = bootstrap_bands(mspec, panel, smoothed, "ols", 12, 0.9, seed=7)["temperature"]
        b = bootstrap_bands(mspec, panel, smoothed, "ols", 12, 0.9, seed=7)["temperature"]
        npt.assert_array_equal(a.lower, b.lower)
        npt.assert_array_equal(a.upper, b.upper)
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        write_band_csv(a, pa)
        write_band_csv(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_grid_inside_domain_and_increasing(self, zero_noise_inputs):
        mspec, panel, smoothed = zero_noise_inputs
        band = bootstrap_bands(mspec, panel, smoothed, "ols", 5, 0.9, seed=1)["temperature"]
        assert band.grid[0] == 0.0 and band.grid[-1] == mspec.season.t_end
        assert np.all(np.diff(band.grid) > 0)
        assert len(band.grid) == 201

    def test_identity_resample_matches_point_estimate(self, zero_noise_inputs):
        mspec, panel, smoothed = zero_noise_inputs
        grid = np.linspace(0.0, mspec.season.t_end, 201)
        point = _gamma_curves(mspec, panel, smoothed, "ols", grid)
        ypanel, spanels = _resample(panel, smoothed, np.arange(len(panel.provinces)))
        replica = _gamma_curves(mspec, ypanel, spanels, "ols", grid)
        npt.assert_allclose(replica["temperature"], point["temperature"], atol=1e-8)

    def test_level_nesting(self):
        spec = in_span_spec(noise_sd=0.05)
        data = generate_synthetic(spec)
        mspec = in_span_model_spec(spec.domain)
        smoothed = smooth_covariates(mspec, data.raw_panels)
        wide = bootstrap_bands(mspec, data.yield_panel, smoothed, "ols", 60, 0.99, seed=5)["temperature"]
        narrow = bootstrap_bands(mspec, data.yield_panel, smoothed, "ols", 60, 0.90, seed=5)["temperature"]
        assert np.all(wide.lower <= narrow.lower + 1e-12)
        assert np.all(narrow.upper <= wide.upper + 1e-12)

    def test_band_distribution_invariant_to_province_order(self):
        spec = in_span_spec(noise_sd=0.05, n_provinces=8, n_years=5)
        data = generate_synthetic(spec)
        mspec = in_span_model_spec(spec.domain)
        smoothed = smooth_covariates(mspec, data.raw_panels)
        perm = np.random.default_rng(0).permutation(len(data.yield_panel.provinces))
        panel_perm = data.yield_panel.take_provinces(perm)
        smoothed_perm = {k: v.take_provinces(perm) for k, v in smoothed.items()}

        def mean_width(panel, spanels, seed):
            band = bootstrap_bands(mspec, panel, spanels, "ols", 15, 0.95, seed=seed)["temperature"]
            return float(np.mean(band.upper - band.lower))

        seeds = range(40)
        base = np.mean([mean_width(data.yield_panel, smoothed, s) for s in seeds])
        permuted = np.mean([mean_width(panel_perm, smoothed_perm, s) for s in seeds])
        assert abs(base - permuted) <= 0.10 * base

    def test_failure_tally(self, zero_noise_inputs, monkeypatch):
        mspec, panel, smoothed = zero_noise_inputs
        import cropfda.bands as bands_mod

        calls = {"n": 0}
        original = bands_mod._gamma_curves

        def flaky(spec, pnl, smo, tag, grid):
            calls["n"] += 1
            if calls["n"] > 1 and calls["n"] % 2 == 0:  # keep the point fit alive
                raise CropFdaError("synthetic replica failure")
            return original(spec, pnl, smo, tag, grid)

        monkeypatch.setattr(bands_mod, "_gamma_curves", flaky)
        with pytest.raises(BootstrapError, match="replicas failed"):
            bands_mod.bootstrap_bands(mspec, panel, smoothed, "ols", 10, 0.9, seed=2)

    def test_validation(self, zero_noise_inputs):
        mspec, panel, smoothed = zero_noise_inputs
        with pytest.raises(ConfigError):
            bootstrap_bands(mspec, panel, smoothed, "ols", 1, 0.9, seed=0)
        with pytest.raises(ConfigError):
            bootstrap_bands(mspec, panel, smoothed, "ols", 5, 1.2, seed=0)


class TestBandCsv:
    def test_round_trip(self, tmp_path):
        grid = np.linspace(0.0, 10.0, 11)
        band = BandResult(
            covariate="x", estimator="ols", grid=grid,
            lower=np.sin(grid) - 0.5, upper=np.sin(grid) + 0.5, point=np.sin(grid),
            n_replicas=10, level=0.95, seed=4,
        )
        path = tmp_path / band_filename("x", "ols")
        write_band_csv(band, path)
        cols = read_band_csv(path)
        npt.assert_array_equal(cols["t"], grid)
        npt.assert_array_equal(cols["point"], band.point)
        npt.assert_array_equal(cols["lower"], band.lower)
        npt.assert_array_equal(cols["upper"], band.upper)

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d\n1,2,3,4\n")
        with pytest.raises(Exception, match="header"):
            read_band_csv(path)

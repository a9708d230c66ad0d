"""Tests for CSV ingestion, balancing and the synthetic generator."""

import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from cropfda.basis import FourierBasis, SplineBasis
from cropfda.errors import (
    EmptyPanelError,
    FormatError,
    IntegrityError,
    MissingArtifactError,
    RecordError,
)
from cropfda.estimator import CovariateSpec, ModelSpec, fit_model
from cropfda.fdata import center, smooth
from cropfda.fpca import fit_fpca
from cropfda.ingest import (
    eval_curve,
    fine_quadrature,
    generate_synthetic,
    load_weather_panel,
    load_yield_panel,
    maize_shaped_synth_spec,
    periodic_spline_modes,
    synth_spec_from_doc,
    write_weather_csv,
    write_yield_csv,
)
from tests.conftest import small_synth_spec


def write_yield_file(path, rows):
    path.write_text("province_id,year,production_kg,area_ha\n" + "\n".join(rows) + "\n")


class TestYieldLoader:
    def test_log_yield_arithmetic(self, tmp_path):
        path = tmp_path / "y.csv"
        write_yield_file(path, [
            "A,2000,4000,1", "A,2001,4100,1",
            "B,2000,3000,1", "B,2001,3100,1",
        ])
        panel = load_yield_panel(path)
        npt.assert_allclose(panel.y[0, 0], math.log(4000.0), atol=1e-12)
        assert panel.provinces == ["A", "B"]
        assert panel.years == [2000, 2001]

    def test_incomplete_province_dropped_with_warning_record(self, tmp_path):
        path = tmp_path / "y.csv"
        write_yield_file(path, [
            "A,2000,4000,1", "A,2001,4100,1",
            "B,2000,3000,1",
            "C,2000,2000,1", "C,2001,2100,1",
        ])
        panel = load_yield_panel(path)
        assert panel.provinces == ["A", "C"]
        assert panel.dropped == ["B"]

    def test_balancing_is_order_independent(self, tmp_path, rng):
        rows = [
            f"P{j},{2000 + i},{1000 + 13 * j + i},1.5"
            for j in range(4) for i in range(3)
        ]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_yield_file(a, rows)
        shuffled = list(rows)
        rng.shuffle(shuffled)
        write_yield_file(b, shuffled)
        pa, pb = load_yield_panel(a), load_yield_panel(b)
        assert pa.provinces == pb.provinces and pa.years == pb.years
        npt.assert_array_equal(pa.y, pb.y)

    def test_errors(self, tmp_path):
        missing = tmp_path / "nope.csv"
        with pytest.raises(MissingArtifactError):
            load_yield_panel(missing)

        bad_area = tmp_path / "area.csv"
        write_yield_file(bad_area, ["A,2000,100,0"])
        with pytest.raises(RecordError, match=":2"):
            load_yield_panel(bad_area)

        bad_prod = tmp_path / "prod.csv"
        write_yield_file(bad_prod, ["A,2000,0,1"])
        with pytest.raises(RecordError):
            load_yield_panel(bad_prod)

        unparseable = tmp_path / "fmt.csv"
        write_yield_file(unparseable, ["A,2000,abc,1"])
        with pytest.raises(FormatError, match=":2"):
            load_yield_panel(unparseable)

        duplicate = tmp_path / "dup.csv"
        write_yield_file(duplicate, ["A,2000,10,1", "A,2000,11,1"])
        with pytest.raises(RecordError):
            load_yield_panel(duplicate)

        empty = tmp_path / "empty.csv"
        write_yield_file(empty, ["A,2000,10,1", "B,2001,10,1"])
        with pytest.raises(EmptyPanelError):
            load_yield_panel(empty)

    def test_maize_sized_panel_dimensions(self, tmp_path):
        rows = [
            f"P{j:03d},{1952 + i},{3000 + j + i},1"
            for j in range(79) for i in range(72)
        ]
        path = tmp_path / "maize.csv"
        write_yield_file(path, rows)
        panel = load_yield_panel(path)
        assert panel.y.shape == (79, 72)


class TestWeatherLoader:
    def _yield_panel(self, tmp_path, provinces=("A", "B"), years=(2000, 2001)):
        path = tmp_path / "y.csv"
        rows = [f"{p},{y},100,1" for p in provinces for y in years]
        write_yield_file(path, rows)
        return load_yield_panel(path)

    def _weather_rows(self, provinces, years, n_samples):
        return [
            f"{p},{y},{t},{20.0 + 0.1 * t}"
            for p in provinces for y in years for t in range(n_samples)
        ]

    def _sidecar(self, n_samples, cadence="hourly", start="04-01", end="10-31"):
        return {
            "cadence": cadence, "n_samples": n_samples,
            "season_start": start, "season_end": end, "covariate": "temperature",
        }

    def test_hourly_maize_sized_cell(self, tmp_path):
        panel = self._yield_panel(tmp_path)
        path = tmp_path / "w.csv"
        path.write_text(
            "province_id,year,t_index,value\n"
            + "\n".join(self._weather_rows(["A", "B"], [2000, 2001], 5136)) + "\n"
        )
        raw = load_weather_panel(path, self._sidecar(5136), panel)
        assert raw.n_samples == 5136
        assert raw.domain.t_end == 214.0
        npt.assert_allclose(raw.sample_times()[-1], 5135 / 24.0)

    def test_daily_precipitation_sized_cell(self, tmp_path):
        panel = self._yield_panel(tmp_path)
        path = tmp_path / "w.csv"
        path.write_text(
            "province_id,year,t_index,value\n"
            + "\n".join(self._weather_rows(["A", "B"], [2000, 2001], 150)) + "\n"
        )
        side = self._sidecar(150, cadence="daily", start="02-01", end="06-30")
        raw = load_weather_panel(path, side, panel)
        assert raw.n_samples == 150
        assert raw.domain.t_end == 150.0

    def test_missing_cell_is_integrity_error(self, tmp_path):
        panel = self._yield_panel(tmp_path)
        path = tmp_path / "w.csv"
        rows = self._weather_rows(["A"], [2000, 2001], 10)
        rows += self._weather_rows(["B"], [2000], 10)  # B/2001 absent
        path.write_text("province_id,year,t_index,value\n" + "\n".join(rows) + "\n")
        side = self._sidecar(10, cadence="daily", start="02-01", end="06-30")
        with pytest.raises(IntegrityError, match=r"B.*2001"):
            load_weather_panel(path, side, panel)

    def test_gap_and_duplicate(self, tmp_path):
        panel = self._yield_panel(tmp_path, provinces=("A",), years=(2000,))
        side = self._sidecar(5, cadence="daily", start="02-01", end="06-30")

        gap = tmp_path / "gap.csv"
        rows = [f"A,2000,{t},1.0" for t in (0, 1, 3, 4)]
        gap.write_text("province_id,year,t_index,value\n" + "\n".join(rows) + "\n")
        with pytest.raises(IntegrityError, match=r"A.*2000.*2"):
            load_weather_panel(gap, side, panel)

        dup = tmp_path / "dup.csv"
        rows = [f"A,2000,{t},1.0" for t in (0, 1, 2, 2, 4)]
        dup.write_text("province_id,year,t_index,value\n" + "\n".join(rows) + "\n")
        with pytest.raises(IntegrityError, match="duplicate"):
            load_weather_panel(dup, side, panel)

    def test_sidecar_strictness(self, tmp_path):
        panel = self._yield_panel(tmp_path, provinces=("A",), years=(2000,))
        side = self._sidecar(5, cadence="daily", start="02-01", end="06-30")
        side["extra"] = 1
        with pytest.raises(FormatError, match="extra"):
            load_weather_panel(tmp_path / "w.csv", side, panel)


class TestRoundTrip:
    def test_corpus_round_trips_bit_exactly(self, tmp_path):
        data = generate_synthetic(small_synth_spec())
        ypath = tmp_path / "yields.csv"
        write_yield_csv(
            data.yield_panel.provinces, data.yield_panel.years,
            data.production, data.area, ypath,
        )
        reloaded = load_yield_panel(ypath)
        npt.assert_array_equal(reloaded.y, data.yield_panel.y)

        raw = data.raw_panels["temperature"]
        wpath = tmp_path / "temperature.csv"
        write_weather_csv(raw, wpath, "02-01", "06-30")
        meta = json.loads((tmp_path / "temperature.csv.meta.json").read_text())
        back = load_weather_panel(wpath, meta, reloaded)
        npt.assert_array_equal(back.values, raw.values)
        assert back.cadence == raw.cadence


class TestGenerator:
    def test_deterministic(self):
        a = generate_synthetic(small_synth_spec())
        b = generate_synthetic(small_synth_spec())
        npt.assert_array_equal(a.yield_panel.y, b.yield_panel.y)
        npt.assert_array_equal(
            a.raw_panels["temperature"].values, b.raw_panels["temperature"].values
        )
        assert a.truth == b.truth

    def test_seed_changes_panels(self):
        a = generate_synthetic(small_synth_spec(seed=1))
        b = generate_synthetic(small_synth_spec(seed=2))
        assert not np.array_equal(a.yield_panel.y, b.yield_panel.y)

    def test_pure_fixed_effects_recovered_exactly(self):
        spec = synth_spec_from_doc({
            "schema_version": 1,
            "n_provinces": 6, "n_years": 5, "base_year": 2000,
            "season": {"start": "02-01", "end": "06-30"},
            "covariates": [{
                "name": "temperature",
                "mean": [{"kind": "const", "value": 10.0}],
                "modes": [[1.0, {"kind": "half_sine", "k": 1}]],
            }],
            "gamma": {},
            "beta": [0.05, -1e-3],
            "alpha_mean": 8.0, "alpha_sd": 0.4,
            "noise_sd": 0.0, "seed": 77,
        })
        data = generate_synthetic(spec)
        model = ModelSpec(
            season=spec.domain,
            covariates=(CovariateSpec(
                "temperature",
                {"kind": "fourier", "nbasis": 9},
                {"kind": "spline", "nbasis": 5, "order": 4},
            ),),
            trend_degree=2, quantiles=(), base_year=2000,
        )
        fit = fit_model(model, data.yield_panel, data.raw_panels, tags=["ols"])
        alphas = np.array([data.truth["alpha"][p] for p in fit.provinces])
        npt.assert_allclose(fit.fits["ols"].alpha, alphas, atol=1e-8)
        npt.assert_allclose(fit.fits["ols"].beta, [0.05, -1e-3], atol=1e-8)

    def test_single_mode_panel_retains_one_component(self):
        single = synth_spec_from_doc({
            "schema_version": 1,
            "n_provinces": 8, "n_years": 6, "base_year": 2000,
            "season": {"start": "02-01", "end": "06-30"},
            "covariates": [{
                "name": "temperature",
                "mean": [{"kind": "const", "value": 10.0}],
                "modes": [[2.0, {"kind": "half_sine", "k": 1}]],
            }],
            "gamma": {},
            "beta": [0.0],
            "alpha_mean": 8.0, "alpha_sd": 0.2,
            "noise_sd": 0.0, "seed": 5,
        })
        data = generate_synthetic(single)
        smoothed = smooth(data.raw_panels["temperature"], FourierBasis(single.domain, 15))
        res = fit_fpca(center(smoothed), SplineBasis(single.domain, nbasis=6, order=4), 0.9)
        assert res.n_retained == 1

    def test_scenario_oracle_matches_independent_quadrature(self):
        spec = small_synth_spec()
        data = generate_synthetic(spec)
        oracle = data.truth["scenario"]
        gamma = data.truth["gamma"]["temperature"]
        domain = spec.domain
        nodes = np.linspace(oracle["t0"], oracle["t1"], 40001)
        values = eval_curve(gamma, nodes, domain)
        independent = np.trapezoid(values, nodes)
        npt.assert_allclose(oracle["delta_log_yield"], oracle["delta"] * independent, atol=1e-9)

    def test_cumulative_target_curves(self):
        doc = {
            "schema_version": 1,
            "n_provinces": 4, "n_years": 3, "base_year": 2000,
            "season": {"start": "02-01", "end": "06-30"},
            "covariates": [{
                "name": "precipitation",
                "mean": [{"kind": "poly", "coeffs": [0.0, 200.0]}],
                "modes": [[20.0, {"kind": "half_sine", "k": 1}]],
                "target_cumulative": True,
            }],
            "gamma": {},
            "beta": [0.0],
            "alpha_mean": 8.0, "alpha_sd": 0.1,
            "noise_sd": 0.0, "seed": 11,
        }
        spec = synth_spec_from_doc(doc)
        data = generate_synthetic(spec)
        raw = data.raw_panels["precipitation"]
        cums = np.cumsum(raw.values, axis=1)
        times = raw.sample_times()
        mean_curve = eval_curve(doc["covariates"][0]["mean"], times, spec.domain)
        # Cumulative sums of the emitted series recover curves around the mean.
        assert np.abs(cums.mean(axis=0) - mean_curve).max() < 25.0
        assert np.abs(np.diff(cums, axis=1) - raw.values[:, 1:]).max() < 1e-9

    def test_strict_spec_parsing(self):
        with pytest.raises(Exception, match="unknown"):
            synth_spec_from_doc({"schema_version": 1, "bogus": 1})


class TestPeriodicSplineModes:
    def test_orthonormal_and_periodic(self):
        spec = maize_shaped_synth_spec()
        domain = spec.domain
        modes = periodic_spline_modes(domain, nbasis=7)
        assert len(modes) == 6
        grid = np.linspace(0.0, domain.t_end, 20001)
        values = np.vstack([eval_curve(m, grid, domain) for m in modes])
        gram = np.trapezoid(values[:, None, :] * values[None, :, :], grid, axis=2)
        npt.assert_allclose(gram, np.eye(6), atol=1e-6)
        npt.assert_allclose(values[:, 0], values[:, -1], atol=1e-12)

    def test_fine_quadrature_exact_on_polynomial(self):
        value = fine_quadrature(lambda t: 3.0 * t ** 2, 0.0, 2.0)
        npt.assert_allclose(value, 8.0, atol=1e-6)

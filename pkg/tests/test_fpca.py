"""Tests for the functional PCA decomposition and score projection."""

import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg

from cropfda.basis import FourierBasis, PolygonalBasis, SeasonDomain, SplineBasis
from cropfda.errors import ConfigError, InsufficientDataError, StateError
from cropfda.fdata import FunctionalPanel, RawSeriesPanel, center, smooth
from cropfda.fpca import cross_gram, fit_fpca, project_scores


def mode_panel(rng, n_cells, amplitudes, t_end=150.0, mean_level=10.0):
    """Smoothed panel driven by half-sine modes with the given amplitudes."""
    domain = SeasonDomain(t_end)
    times = np.arange(int(t_end))
    modes = np.vstack([np.sin((k + 1) * np.pi * times / t_end) for k in range(len(amplitudes))])
    z = rng.standard_normal((n_cells, len(amplitudes)))
    values = mean_level + (z * np.asarray(amplitudes)) @ modes
    raw = RawSeriesPanel("x", "daily", values, [f"P{j}" for j in range(n_cells)], [0], domain)
    return smooth(raw, FourierBasis(domain, 25))


@pytest.fixture(scope="module")
def fitted():
    rng = np.random.default_rng(42)
    panel = center(mode_panel(rng, 150, (2.0, 1.0)))
    harmonic = SplineBasis(panel.basis.domain, nbasis=7, order=4)
    return panel, fit_fpca(panel, harmonic, 0.9)


class TestFitFpca:
    def test_rank_one_panel(self):
        rng = np.random.default_rng(7)
        panel = center(mode_panel(rng, 60, (3.0,)))
        harmonic = SplineBasis(panel.basis.domain, nbasis=7, order=4)
        res = fit_fpca(panel, harmonic, 0.9)
        assert res.n_retained == 1
        npt.assert_allclose(res.variance_fraction[0], 1.0, atol=1e-10)
        # The single eigenfunction is the normalized common shape.
        grid = np.linspace(0, 150, 401)
        shape = np.sin(np.pi * grid / 150.0)
        shape = shape / np.sqrt(np.trapezoid(shape ** 2, grid))
        values = res.eigenfunction_values(grid, 0)
        assert np.abs(values - shape).max() < 5e-3

    def test_score_columns_have_zero_mean(self, fitted):
        _, res = fitted
        assert np.abs(res.scores.mean(axis=0)).max() < 1e-8

    def test_toy_eigenvalues_match_dense_oracle(self):
        # Hand-built 3-curve panel on a 2-element basis; the oracle builds
        # W^(1/2) Cov W^(1/2) with scipy.sqrtm and takes dense eigenvalues.
        domain = SeasonDomain(2.0)
        basis = PolygonalBasis(domain, nodes=[0.0, 2.0])
        coefs = np.array([[1.0, 0.5], [-0.5, 0.25], [-0.5, -0.75]])
        panel = FunctionalPanel(
            basis=basis, coefs=coefs, mean_coefs=np.zeros(2), centered=True,
            provinces=["A", "B", "C"], years=[0],
        )
        res = fit_fpca(panel, basis, 0.99)
        gram = basis.gram()
        root = scipy.linalg.sqrtm(gram)
        cov = np.cov(coefs, rowvar=False, ddof=1)
        oracle = np.sort(np.linalg.eigvals(root @ cov @ root).real)[::-1]
        npt.assert_allclose(res.eigenvalues[:2], oracle, atol=1e-10)

    def test_orthonormal_eigenfunctions(self, fitted):
        _, res = fitted
        gram = res.harmonic_basis.gram()
        eig = res.retained_eigenfunctions
        npt.assert_allclose(eig @ gram @ eig.T, np.eye(res.n_retained), atol=1e-8)

    def test_score_variance_equals_eigenvalue(self, fitted):
        _, res = fitted
        variances = res.scores.var(axis=0, ddof=1)
        npt.assert_allclose(variances, res.eigenvalues[: res.n_retained], atol=1e-8)

    def test_score_columns_uncorrelated(self, fitted):
        _, res = fitted
        corr = np.corrcoef(res.scores.T)
        npt.assert_allclose(corr, np.eye(res.n_retained), atol=1e-8)

    def test_variance_fractions_and_truncation(self, fitted):
        _, res = fitted
        assert res.variance_fraction.sum() <= 1.0 + 1e-12
        cumulative = np.cumsum(res.variance_fraction)
        assert cumulative[res.n_retained - 1] >= res.delta - 1e-12
        if res.n_retained > 1:
            assert cumulative[res.n_retained - 2] < res.delta

    def test_sign_convention_nonnegative_integrals(self, fitted):
        _, res = fitted
        integrals = res.eigenfunctions @ res.harmonic_basis.element_integrals()
        at_zero = res.eigenfunctions @ res.harmonic_basis.evaluate([0.0])[0]
        tol = 1e-10 * np.sqrt(res.harmonic_basis.domain.length)
        for integral, v0 in zip(integrals, at_zero):
            assert integral >= -tol
            if abs(integral) <= tol:
                assert v0 >= -1e-10

    def test_reconstruction_error_identity(self):
        # Panel living exactly on the harmonic basis: the truncation error
        # equals the discarded eigenvalue mass (times n - 1).
        rng = np.random.default_rng(3)
        domain = SeasonDomain(100.0)
        harmonic = SplineBasis(domain, nbasis=6, order=4)
        coefs = rng.standard_normal((40, 6))
        coefs -= coefs.mean(axis=0)
        panel = FunctionalPanel(
            basis=harmonic, coefs=coefs, mean_coefs=np.zeros(6), centered=True,
            provinces=[f"P{j}" for j in range(40)], years=[0],
        )
        res = fit_fpca(panel, harmonic, 0.5)
        gram = harmonic.gram()
        cross = cross_gram(panel.basis, harmonic)
        all_scores = (panel.coefs @ cross) @ res.eigenfunctions.T
        n = panel.n_cells
        previous = np.inf
        for keep in range(1, 7):
            recon = all_scores[:, :keep] @ res.eigenfunctions[:keep]
            diff = panel.coefs - recon
            err = float(np.einsum("ij,jk,ik->", diff, gram, diff))
            expected = res.eigenvalues[keep:].sum() * (n - 1)
            npt.assert_allclose(err, expected, atol=1e-8 * max(1.0, expected))
            assert err <= previous + 1e-12
            previous = err

    def test_errors(self):
        rng = np.random.default_rng(5)
        domain = SeasonDomain(10.0)
        basis = FourierBasis(domain, 5)
        uncentered = FunctionalPanel(
            basis=basis, coefs=rng.standard_normal((3, 5)), mean_coefs=np.zeros(5),
            centered=False, provinces=["A", "B", "C"], years=[0],
        )
        harmonic = SplineBasis(domain, nbasis=5, order=4)
        with pytest.raises(StateError):
            fit_fpca(uncentered, harmonic, 0.9)
        single = FunctionalPanel(
            basis=basis, coefs=np.zeros((1, 5)), mean_coefs=np.zeros(5),
            centered=True, provinces=["A"], years=[0],
        )
        with pytest.raises(InsufficientDataError):
            fit_fpca(single, harmonic, 0.9)
        centered = FunctionalPanel(
            basis=basis, coefs=rng.standard_normal((4, 5)), mean_coefs=np.zeros(5),
            centered=True, provinces=list("ABCD"), years=[0],
        )
        with pytest.raises(ConfigError):
            fit_fpca(centered, SplineBasis(SeasonDomain(9.0), nbasis=5, order=4), 0.9)
        with pytest.raises(ConfigError):
            fit_fpca(centered, harmonic, 1.5)


class TestProjectScores:
    def test_training_panel_reproduces_scores(self, fitted):
        panel, res = fitted
        npt.assert_allclose(project_scores(res, panel), res.scores, atol=1e-10)

    def test_zero_curve_gives_zero_scores(self, fitted):
        panel, res = fitted
        zero = FunctionalPanel(
            basis=panel.basis, coefs=np.zeros((1, panel.basis.nbasis)),
            mean_coefs=panel.mean_coefs, centered=True, provinces=["Z"], years=[0],
        )
        npt.assert_allclose(project_scores(res, zero), 0.0, atol=1e-12)

    def test_eigenfunction_projects_to_unit_vector(self, fitted):
        _, res = fitted
        harmonic = res.harmonic_basis
        phi1 = FunctionalPanel(
            basis=harmonic, coefs=res.eigenfunctions[:1].copy(),
            mean_coefs=np.zeros(harmonic.nbasis), centered=True,
            provinces=["Z"], years=[0],
        )
        scores = project_scores(res, phi1)[0]
        expected = np.zeros(res.n_retained)
        expected[0] = 1.0
        npt.assert_allclose(scores, expected, atol=1e-8)

    def test_requires_centered_panel(self, fitted):
        panel, res = fitted
        raw = FunctionalPanel(
            basis=panel.basis, coefs=panel.coefs, mean_coefs=panel.mean_coefs,
            centered=False, provinces=panel.provinces, years=panel.years,
        )
        with pytest.raises(StateError):
            project_scores(res, raw)

    def test_domain_mismatch(self, fitted):
        _, res = fitted
        other = FunctionalPanel(
            basis=FourierBasis(SeasonDomain(99.0), 5), coefs=np.zeros((1, 5)),
            mean_coefs=np.zeros(5), centered=True, provinces=["Z"], years=[0],
        )
        with pytest.raises(ConfigError):
            project_scores(res, other)

"""Functional principal component analysis of a centered panel.

The centered curves are first projected onto a coarse harmonic basis by
continuous least squares on the quadrature grid; the eigenproblem of the
Gram-weighted covariance of those projection coefficients then yields
L2-orthonormal eigenfunctions constrained to the harmonic span.  Scores are
quadrature inner products of the original centered curves with the
eigenfunctions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSystem, simpson_rule
from .errors import ConfigError, InsufficientDataError, StateError
from .fdata import FunctionalPanel

EIG_CLIP = 1e-12


def cross_gram(basis_a: BasisSystem, basis_b: BasisSystem) -> np.ndarray:
    """Quadrature inner products <phi_a, psi_b> [nbasis_a x nbasis_b]."""
    if not basis_a.domain.same_interval(basis_b.domain):
        raise ConfigError("cross Gram requires bases on the same domain")
    nodes, weights = simpson_rule(basis_a.domain.t_start, basis_a.domain.t_end)
    return basis_a.evaluate(nodes).T @ (weights[:, None] * basis_b.evaluate(nodes))


@dataclass
class FpcaResult:
    """Eigenfunctions on the harmonic basis plus scores of the fitted panel.

    ``eigenfunctions`` holds one coefficient row per component (all computed
    components, not just the retained ones); ``scores`` covers the first
    ``n_retained`` components only.
    """

    harmonic_basis: BasisSystem
    eigenfunctions: np.ndarray
    eigenvalues: np.ndarray
    variance_fraction: np.ndarray
    n_retained: int
    scores: np.ndarray
    delta: float

    @property
    def retained_eigenfunctions(self) -> np.ndarray:
        return self.eigenfunctions[: self.n_retained]

    def eigenfunction_values(self, times, component: int) -> np.ndarray:
        return self.harmonic_basis.evaluate(times) @ self.eigenfunctions[component]


def _sqrt_factors(gram: np.ndarray):
    s, u = np.linalg.eigh(gram)
    s = np.clip(s, EIG_CLIP, None)
    root = u @ (np.sqrt(s)[:, None] * u.T)
    inv_root = u @ ((1.0 / np.sqrt(s))[:, None] * u.T)
    return root, inv_root


def _fix_signs(eigfuns: np.ndarray, basis: BasisSystem) -> np.ndarray:
    """Flip each eigenfunction so its integral over the domain is >= 0; break
    near-zero-integral ties with the value at t = 0."""
    integrals = eigfuns @ basis.element_integrals()
    at_zero = eigfuns @ basis.evaluate([basis.domain.t_start])[0]
    tie = np.abs(integrals) <= 1e-10 * np.sqrt(basis.domain.length)
    ref = np.where(tie, at_zero, integrals)
    flip = ref < 0
    out = eigfuns.copy()
    out[flip] *= -1.0
    return out


def fit_fpca(panel: FunctionalPanel, harmonic_basis: BasisSystem, delta: float) -> FpcaResult:
    """Karhunen-Loeve decomposition of a centered panel.

    Retains the smallest number of components whose cumulative variance
    fraction reaches ``delta``.
    """
    if not panel.centered:
        raise StateError("fPCA requires a centered panel")
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    if panel.n_cells < 2:
        raise InsufficientDataError(f"fPCA needs at least 2 curves, got {panel.n_cells}")
    if not harmonic_basis.domain.same_interval(panel.basis.domain):
        raise ConfigError("harmonic basis must live on the panel's domain")

    gram = harmonic_basis.gram()
    cross = cross_gram(panel.basis, harmonic_basis)
    # Continuous least-squares projection of each curve onto the harmonic span.
    proj = np.linalg.solve(gram, (panel.coefs @ cross).T).T
    proj_centered = proj - proj.mean(axis=0)
    cov = proj_centered.T @ proj_centered / (panel.n_cells - 1)

    root, inv_root = _sqrt_factors(gram)
    sym = root @ cov @ root
    lam, vec = np.linalg.eigh(0.5 * (sym + sym.T))
    order = np.argsort(lam, kind="stable")[::-1]
    lam = np.clip(lam[order], 0.0, None)
    eigfuns = (inv_root @ vec[:, order]).T

    norms = np.sqrt(np.einsum("ij,jk,ik->i", eigfuns, gram, eigfuns))
    safe = norms > 0
    eigfuns[safe] /= norms[safe, None]
    eigfuns = _fix_signs(eigfuns, harmonic_basis)

    total = lam.sum()
    if total <= 0:
        raise InsufficientDataError("panel has no variance to decompose")
    fractions = lam / total
    cumulative = np.cumsum(fractions)
    reached = np.nonzero(cumulative >= delta - 1e-12)[0]
    n_retained = int(reached[0]) + 1 if reached.size else lam.size

    scores = (panel.coefs @ cross) @ eigfuns[:n_retained].T
    return FpcaResult(
        harmonic_basis=harmonic_basis,
        eigenfunctions=eigfuns,
        eigenvalues=lam,
        variance_fraction=fractions,
        n_retained=n_retained,
        scores=scores,
        delta=float(delta),
    )


def project_scores(result: FpcaResult, panel: FunctionalPanel) -> np.ndarray:
    """Scores of a centered panel against stored eigenfunctions, using the
    same quadrature inner product as the fit."""
    if not panel.centered:
        raise StateError("score projection requires a centered panel")
    if not panel.basis.domain.same_interval(result.harmonic_basis.domain):
        raise ConfigError("panel domain does not match the fitted harmonic basis")
    cross = cross_gram(panel.basis, result.harmonic_basis)
    return (panel.coefs @ cross) @ result.retained_eigenfunctions.T

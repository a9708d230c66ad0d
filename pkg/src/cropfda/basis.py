"""Finite-dimensional function bases on the growing-season interval [0, T].

Three families are supported: an orthonormal Fourier basis, clamped B-splines,
and the polygonal (hat function) basis.  Every basis offers point evaluation,
an L2 Gram matrix and definite integrals of coefficient curves, which is all
the smoothing, fPCA and scenario machinery needs.

Inner products are computed with a composite Simpson rule on a fixed uniform
grid (``QUAD_POINTS`` nodes over the integration interval); closed forms are
used where they are trivially available (Fourier orthonormality, unweighted
definite integrals).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .errors import ConfigError, DomainError, IntervalError

QUAD_POINTS = 2001


@dataclass(frozen=True)
class SeasonDomain:
    """Growing season [t_start, t_end] measured in days since season start."""

    t_end: float
    label: str = ""
    t_start: float = 0.0

    def __post_init__(self):
        if self.t_start != 0.0:
            raise ConfigError(f"season must start at day 0, got {self.t_start}")
        if not (self.t_end > self.t_start):
            raise ConfigError(f"season end must be positive, got {self.t_end}")

    @property
    def length(self) -> float:
        return self.t_end - self.t_start

    def same_interval(self, other: "SeasonDomain") -> bool:
        return self.t_start == other.t_start and self.t_end == other.t_end


def simpson_rule(t0: float, t1: float, npoints: int = QUAD_POINTS):
    """Nodes and weights of the composite Simpson rule on [t0, t1].

    ``npoints`` must be odd so the panel count is even.
    """
    if npoints < 3 or npoints % 2 == 0:
        raise ConfigError(f"Simpson rule needs an odd number of nodes >= 3, got {npoints}")
    nodes = np.linspace(t0, t1, npoints)
    h = (t1 - t0) / (npoints - 1)
    weights = np.full(npoints, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    weights *= h / 3.0
    return nodes, weights


def ramp_weight(t: np.ndarray, t0: float, t1: float) -> np.ndarray:
    """Linear scenario weight rising from 1/(t1-t0) at t0 to 1 at t1."""
    d = t1 - t0
    return (t - t0) / d * (1.0 - 1.0 / d) + 1.0 / d


class BasisSystem:
    """Common interface of the concrete basis families.

    Instances are immutable after construction and safe to share between
    threads; all operations are pure functions of their arguments.
    """

    kind: str

    def __init__(self, domain: SeasonDomain, nbasis: int):
        self.domain = domain
        self.nbasis = int(nbasis)
        self._gram_cache: np.ndarray | None = None

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, times) -> np.ndarray:
        """Matrix of basis elements evaluated at ``times`` [len(times) x nbasis]."""
        t = np.atleast_1d(np.asarray(times, dtype=float))
        lo, hi = self.domain.t_start, self.domain.t_end
        if t.size:
            bad = (t < lo) | (t > hi)
            if bad.any():
                offender = float(t[bad][0])
                raise DomainError(
                    f"time {offender!r} outside the season domain [{lo}, {hi}]"
                )
        return self._evaluate(t)

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- inner products -----------------------------------------------------

    def gram(self) -> np.ndarray:
        """Gram matrix of pairwise L2 inner products over the full domain."""
        if self._gram_cache is None:
            g = self._gram()
            g = 0.5 * (g + g.T)
            g.setflags(write=False)
            self._gram_cache = g
        return self._gram_cache

    def _gram(self) -> np.ndarray:
        nodes, weights = simpson_rule(self.domain.t_start, self.domain.t_end)
        phi = self.evaluate(nodes)
        return phi.T @ (weights[:, None] * phi)

    def element_integrals(self, t0: float | None = None, t1: float | None = None) -> np.ndarray:
        """Exact definite integrals of each basis element over [t0, t1]."""
        if t0 is None:
            t0 = self.domain.t_start
        if t1 is None:
            t1 = self.domain.t_end
        self._check_interval(t0, t1)
        return self._element_integrals(float(t0), float(t1))

    def _element_integrals(self, t0: float, t1: float) -> np.ndarray:
        raise NotImplementedError

    def integrate(self, coeffs, t0: float, t1: float, weight: str = "constant") -> float:
        """Integral of the coefficient curve sum_s coeffs[s]*phi_s over [t0, t1].

        ``weight="constant"`` uses exact per-element antiderivatives;
        ``weight="ramp"`` applies the linear scenario weight and integrates
        with the module's Simpson rule on [t0, t1].
        """
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.nbasis,):
            raise ConfigError(
                f"coefficient vector has shape {coeffs.shape}, expected ({self.nbasis},)"
            )
        self._check_interval(t0, t1)
        if weight == "constant":
            return float(self._element_integrals(float(t0), float(t1)) @ coeffs)
        if weight == "ramp":
            nodes, weights = simpson_rule(float(t0), float(t1))
            values = self.evaluate(nodes) @ coeffs
            return float(weights @ (ramp_weight(nodes, t0, t1) * values))
        raise ConfigError(f"unknown weight kind {weight!r}")

    def _check_interval(self, t0: float, t1: float) -> None:
        lo, hi = self.domain.t_start, self.domain.t_end
        if not (lo <= t0 < t1 <= hi):
            raise IntervalError(
                f"invalid interval [{t0}, {t1}] for season domain [{lo}, {hi}]"
            )

    # -- serialization ------------------------------------------------------

    def to_config(self) -> dict:
        raise NotImplementedError

    def same_system(self, other: "BasisSystem") -> bool:
        return (
            self.kind == other.kind
            and self.nbasis == other.nbasis
            and self.domain.same_interval(other.domain)
        )

    def __repr__(self):
        return f"{type(self).__name__}(nbasis={self.nbasis}, T={self.domain.t_end})"


class FourierBasis(BasisSystem):
    """Orthonormal Fourier basis: 1/sqrt(T), then sin/cos pairs.

    ``nbasis`` must be odd (the constant plus complete sine/cosine pairs);
    element 2k-1 is sqrt(2/T) sin(2 pi k t / T) and element 2k the matching
    cosine.
    """

    kind = "fourier"

    def __init__(self, domain: SeasonDomain, nbasis: int):
        if nbasis < 1 or nbasis % 2 == 0:
            raise ConfigError(
                f"Fourier basis size must be odd (constant plus sin/cos pairs), got {nbasis}"
            )
        super().__init__(domain, nbasis)

    @property
    def n_pairs(self) -> int:
        return (self.nbasis - 1) // 2

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        T = self.domain.length
        out = np.empty((t.size, self.nbasis))
        out[:, 0] = 1.0 / np.sqrt(T)
        scale = np.sqrt(2.0 / T)
        for k in range(1, self.n_pairs + 1):
            arg = 2.0 * np.pi * k * t / T
            out[:, 2 * k - 1] = scale * np.sin(arg)
            out[:, 2 * k] = scale * np.cos(arg)
        return out

    def _gram(self) -> np.ndarray:
        # Orthonormal on the full period by construction.
        return np.eye(self.nbasis)

    def _element_integrals(self, t0: float, t1: float) -> np.ndarray:
        T = self.domain.length
        out = np.empty(self.nbasis)
        out[0] = (t1 - t0) / np.sqrt(T)
        scale = np.sqrt(2.0 / T)
        for k in range(1, self.n_pairs + 1):
            w = 2.0 * np.pi * k / T
            out[2 * k - 1] = scale * (np.cos(w * t0) - np.cos(w * t1)) / w
            out[2 * k] = scale * (np.sin(w * t1) - np.sin(w * t0)) / w
        return out

    def to_config(self) -> dict:
        return {"kind": self.kind, "nbasis": self.nbasis}


class SplineBasis(BasisSystem):
    """Clamped B-spline basis of a given order (order = degree + 1).

    ``nbasis = order + len(interior_knots)``; interior knots default to an
    equally spaced grid strictly inside (0, T).
    """

    kind = "spline"

    def __init__(
        self,
        domain: SeasonDomain,
        nbasis: int | None = None,
        order: int = 4,
        interior_knots=None,
    ):
        if order < 1:
            raise ConfigError(f"spline order must be >= 1, got {order}")
        lo, hi = domain.t_start, domain.t_end
        if interior_knots is None:
            if nbasis is None:
                raise ConfigError("spline basis needs nbasis or explicit interior knots")
            n_interior = nbasis - order
            if n_interior < 0:
                raise ConfigError(
                    f"spline nbasis {nbasis} smaller than order {order}"
                )
            interior = np.linspace(lo, hi, n_interior + 2)[1:-1]
        else:
            interior = np.asarray(interior_knots, dtype=float)
            if interior.size and (
                np.any(np.diff(interior) <= 0)
                or interior[0] <= lo
                or interior[-1] >= hi
            ):
                raise ConfigError(
                    "interior knots must be strictly increasing and strictly inside (0, T)"
                )
            if nbasis is not None and nbasis != order + interior.size:
                raise ConfigError(
                    f"nbasis {nbasis} inconsistent with order {order} "
                    f"and {interior.size} interior knots"
                )
        super().__init__(domain, order + interior.size)
        self.order = order
        self.interior_knots = interior
        self.knots = np.concatenate(
            [np.full(order, lo), interior, np.full(order, hi)]
        )

    @property
    def degree(self) -> int:
        return self.order - 1

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        if t.size == 0:
            return np.empty((0, self.nbasis))
        order_idx = np.argsort(t, kind="stable")
        mat = BSpline.design_matrix(t[order_idx], self.knots, self.degree).toarray()
        out = np.empty_like(mat)
        out[order_idx] = mat
        return out

    def _element_integrals(self, t0: float, t1: float) -> np.ndarray:
        out = np.empty(self.nbasis)
        for c in range(self.nbasis):
            coef = np.zeros(self.nbasis)
            coef[c] = 1.0
            anti = BSpline(self.knots, coef, self.degree, extrapolate=False).antiderivative()
            out[c] = anti(t1) - anti(t0)
        return out

    def to_config(self) -> dict:
        return {"kind": self.kind, "nbasis": self.nbasis, "order": self.order}


class PolygonalBasis(BasisSystem):
    """Hat functions on a node grid covering [0, T]; expansions are the
    piecewise-linear interpolants through the node values."""

    kind = "polygonal"

    def __init__(self, domain: SeasonDomain, nodes=None, nbasis: int | None = None):
        lo, hi = domain.t_start, domain.t_end
        if nodes is None:
            if nbasis is None or nbasis < 2:
                raise ConfigError("polygonal basis needs nodes or nbasis >= 2")
            nodes = np.linspace(lo, hi, nbasis)
        else:
            nodes = np.asarray(nodes, dtype=float)
            if nodes.size < 2 or np.any(np.diff(nodes) <= 0):
                raise ConfigError("polygonal nodes must be >= 2 strictly increasing values")
            if nodes[0] != lo or nodes[-1] != hi:
                raise ConfigError(
                    f"polygonal nodes must cover [{lo}, {hi}], got [{nodes[0]}, {nodes[-1]}]"
                )
            if nbasis is not None and nbasis != nodes.size:
                raise ConfigError(f"nbasis {nbasis} does not match {nodes.size} nodes")
        super().__init__(domain, nodes.size)
        self.nodes = nodes

    def _evaluate(self, t: np.ndarray) -> np.ndarray:
        seg = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, self.nbasis - 2)
        lam = (t - self.nodes[seg]) / (self.nodes[seg + 1] - self.nodes[seg])
        out = np.zeros((t.size, self.nbasis))
        rows = np.arange(t.size)
        out[rows, seg] = 1.0 - lam
        out[rows, seg + 1] = lam
        return out

    def _element_integrals(self, t0: float, t1: float) -> np.ndarray:
        # Exact: integrate each hat's piecewise-linear segments clipped to [t0, t1].
        out = np.empty(self.nbasis)
        for c in range(self.nbasis):
            coef = np.zeros(self.nbasis)
            coef[c] = 1.0
            out[c] = self._trapezoid_exact(coef, t0, t1)
        return out

    def integrate(self, coeffs, t0: float, t1: float, weight: str = "constant") -> float:
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.nbasis,):
            raise ConfigError(
                f"coefficient vector has shape {coeffs.shape}, expected ({self.nbasis},)"
            )
        self._check_interval(t0, t1)
        if weight == "constant":
            return self._trapezoid_exact(coeffs, float(t0), float(t1))
        return super().integrate(coeffs, t0, t1, weight)

    def _trapezoid_exact(self, coeffs: np.ndarray, t0: float, t1: float) -> float:
        inner = self.nodes[(self.nodes > t0) & (self.nodes < t1)]
        pts = np.concatenate([[t0], inner, [t1]])
        vals = np.interp(pts, self.nodes, coeffs)
        return float(np.trapezoid(vals, pts))

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "nbasis": self.nbasis}
        default = np.linspace(self.domain.t_start, self.domain.t_end, self.nbasis)
        if not np.array_equal(self.nodes, default):
            cfg["nodes"] = [float(x) for x in self.nodes]
        return cfg


def basis_from_config(config: dict, domain: SeasonDomain) -> BasisSystem:
    """Build a basis from its JSON description on the given domain."""
    cfg = dict(config)
    kind = cfg.pop("kind", None)
    if kind == "fourier":
        return FourierBasis(domain, cfg.pop("nbasis"))
    if kind == "spline":
        return SplineBasis(
            domain,
            nbasis=cfg.pop("nbasis", None),
            order=cfg.pop("order", 4),
            interior_knots=cfg.pop("interior_knots", None),
        )
    if kind == "polygonal":
        return PolygonalBasis(domain, nodes=cfg.pop("nodes", None), nbasis=cfg.pop("nbasis", None))
    raise ConfigError(f"unknown basis kind {kind!r}")

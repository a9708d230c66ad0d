"""Quantile regression via an interior-point LP solver.

The pinball-loss problem min_b sum rho_tau(y - Xb) is solved through its
bounded dual

    max  y'a   s.t.  X'a = (1 - tau) X'1,   0 <= a <= 1,

with a Mehrotra predictor-corrector iteration; the negated equality
multipliers are the regression coefficients.  Each Newton step only factors a
p x p matrix, so the solver scales comfortably to panel-sized designs.  A
brute-force search over basic solutions (all interpolating row subsets) is
available as an oracle and as a fallback for tiny degenerate instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import ConvergenceError, SingularityError

STEP_SCALE = 0.9995
FEASIBILITY_TOL = 1e-8
TARGET_SHRINK = 1e-2  # extra gap reduction attempted beyond the contracted tol


def pinball_loss(residuals, tau: float) -> float:
    """Sum of rho_tau(u) = u * (tau - 1[u < 0]) over the residuals."""
    u = np.asarray(residuals, dtype=float)
    return float(np.sum(u * (tau - (u < 0))))


@dataclass
class QrFit:
    coef: np.ndarray
    dual: np.ndarray
    iterations: int
    gap: float


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    shrink = dv < 0
    if not shrink.any():
        return 1.0
    return min(1.0, float(np.min(-v[shrink] / dv[shrink])))


def solve_qr(X, y, tau: float, max_iter: int = 200, tol: float = 1e-9) -> QrFit:
    """Interior-point quantile regression fit.

    Raises :class:`ConvergenceError` (carrying the final duality gap) if the
    iteration cap is reached before the relative gap drops below ``tol``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if n < p:
        raise SingularityError(f"need at least {p} observations for {p} columns, got {n}")

    c = -y
    b = (1.0 - tau) * X.sum(axis=0)

    # x = (1 - tau) * 1 satisfies the equality constraints exactly, so primal
    # feasibility is preserved by every Newton step.
    x = np.full(n, 1.0 - tau)
    s = np.full(n, tau)
    beta0, *_ = np.linalg.lstsq(X, y, rcond=None)
    lam = -beta0
    e0 = y - X @ beta0
    eps0 = max(0.1 * float(np.mean(np.abs(e0))), 1e-3 * (1.0 + float(np.mean(np.abs(y)))))
    z = np.maximum(-e0, 0.0) + eps0
    w = np.maximum(e0, 0.0) + eps0

    gap = float(x @ z + s @ w)
    scale_b = 1.0 + float(np.max(np.abs(b)))
    scale_c = 1.0 + float(np.max(np.abs(c)))
    stalled = 0

    for iteration in range(1, max_iter + 1):
        r_p = b - X.T @ x
        r_u = 1.0 - x - s
        r_d = c - X @ lam - z + w
        prev_gap = gap
        gap = float(x @ z + s @ w)
        mu = gap / (2 * n)

        rel_gap = gap / (1.0 + abs(float(c @ x)))
        feasible = (
            np.max(np.abs(r_p)) / scale_b <= FEASIBILITY_TOL
            and np.max(np.abs(r_d)) / scale_c <= FEASIBILITY_TOL
        )
        stalled = stalled + 1 if gap > 0.5 * prev_gap else 0
        # Push the gap well past the contracted tolerance while progress is
        # cheap; accept at the contracted tolerance once progress stalls.
        if feasible and (rel_gap <= tol * TARGET_SHRINK or (rel_gap <= tol and stalled >= 3)):
            coef = _polish(X, y, tau, -lam)
            return QrFit(coef=coef, dual=x.copy(), iterations=iteration - 1, gap=gap)

        d = z / x + w / s
        inv_d = 1.0 / d

        def newton(sigma_mu: float, corr_xz: np.ndarray, corr_sw: np.ndarray):
            rhs_n = (
                r_d
                - (sigma_mu - x * z - corr_xz) / x
                + (sigma_mu - s * w - corr_sw - w * r_u) / s
            )
            m = X.T @ (inv_d[:, None] * X)
            rhs = r_p + X.T @ (inv_d * rhs_n)
            jitter = 0.0
            for _ in range(3):
                try:
                    fac = cho_factor(m + jitter * np.eye(p), lower=True)
                    dlam = cho_solve(fac, rhs)
                    break
                except np.linalg.LinAlgError:
                    jitter = max(10.0 * jitter, 1e-12 * np.trace(m) / p)
            else:
                dlam = np.linalg.lstsq(m, rhs, rcond=None)[0]
            dx = inv_d * (X @ dlam - rhs_n)
            ds = r_u - dx
            dz = (sigma_mu - x * z - corr_xz) / x - (z / x) * dx
            dw = (sigma_mu - s * w - corr_sw) / s - (w / s) * ds
            return dx, ds, dlam, dz, dw

        zero = np.zeros(n)
        dx_a, ds_a, dlam_a, dz_a, dw_a = newton(0.0, zero, zero)
        alpha_p = min(_max_step(x, dx_a), _max_step(s, ds_a))
        alpha_d = min(_max_step(z, dz_a), _max_step(w, dw_a))
        mu_aff = (
            (x + alpha_p * dx_a) @ (z + alpha_d * dz_a)
            + (s + alpha_p * ds_a) @ (w + alpha_d * dw_a)
        ) / (2 * n)
        sigma = min(1.0, max(0.0, (mu_aff / mu)) ** 3) if mu > 0 else 0.0

        dx, ds, dlam, dz, dw = newton(sigma * mu, dx_a * dz_a, ds_a * dw_a)
        alpha_p = STEP_SCALE * min(_max_step(x, dx), _max_step(s, ds))
        alpha_d = STEP_SCALE * min(_max_step(z, dz), _max_step(w, dw))

        x = np.maximum(x + alpha_p * dx, 1e-14)
        s = np.maximum(s + alpha_p * ds, 1e-14)
        lam = lam + alpha_d * dlam
        z = np.maximum(z + alpha_d * dz, 1e-14)
        w = np.maximum(w + alpha_d * dw, 1e-14)

    raise ConvergenceError(
        f"quantile regression did not converge in {max_iter} iterations "
        f"(duality gap {gap:.3e})"
    )


def _polish(X: np.ndarray, y: np.ndarray, tau: float, coef: np.ndarray) -> np.ndarray:
    """Crossover to the basic solution through the p smallest residuals.

    The pinball optimum is attained at an interpolating vertex; when the
    vertex implied by the interior point ties or beats it, adopting the
    vertex pins the coefficients to solver-independent precision.  A worse or
    singular candidate leaves the interior solution untouched.
    """
    n, p = X.shape
    residuals = y - X @ coef
    rows = np.argsort(np.abs(residuals), kind="stable")[:p]
    sub = X[rows]
    try:
        candidate = np.linalg.solve(sub, y[rows])
    except np.linalg.LinAlgError:
        return coef
    if not np.all(np.isfinite(candidate)):
        return coef
    obj = pinball_loss(residuals, tau)
    cand_obj = pinball_loss(y - X @ candidate, tau)
    if cand_obj <= obj + 1e-9 * (1.0 + abs(obj)):
        return candidate
    return coef


def solve_qr_enumerate(X, y, tau: float, max_candidates: int = 2_000_000) -> np.ndarray:
    """Exhaustive search over basic solutions (interpolating row subsets).

    Exact on tiny instances; the optimum of the pinball loss is attained at a
    hyperplane through p data points when X has full column rank.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if comb(n, p) > max_candidates:
        raise ValueError(f"enumeration over C({n},{p}) basic solutions is not tractable")
    best_loss = np.inf
    best_coef = None
    for rows in combinations(range(n), p):
        sub = X[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        coef = np.linalg.solve(sub, y[list(rows)])
        loss = pinball_loss(y - X @ coef, tau)
        if loss < best_loss:
            best_loss = loss
            best_coef = coef
    if best_coef is None:
        raise SingularityError("no invertible row subset: design is rank deficient")
    return best_coef

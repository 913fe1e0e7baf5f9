"""Jittering baseline for quantile regression on counts.

Adding Uniform(0,1) noise to a count makes it continuous, so the
classical check-loss machinery applies; the count-model form
Q_alpha(Z | x) = alpha + exp(x' beta) is fitted by minimizing the check
loss of log(max(z - alpha, zeta)) - x' beta with a derivative-free
simplex (the objective is piecewise linear, so gradient methods are the
wrong tool).  Estimates average over independent jitterings, and
continuous quantiles translate back to discrete ones through
ceil(q - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .specfun import DomainError

__all__ = [
    "JitterSettings",
    "JitterFitError",
    "jitter",
    "fit_check_loss",
    "fit_jittered",
    "jittered_curve",
    "dejitter_quantile",
]


@dataclass(frozen=True)
class JitterSettings:
    m_replicates: int = 50
    zeta: float = 1e-5      # floor for z - alpha before the log
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m_replicates < 1:
            raise DomainError(
                f"m_replicates must be >= 1, got {self.m_replicates!r}")
        if not 0.0 < self.zeta < 1.0:
            raise DomainError(f"zeta must lie in (0, 1), got {self.zeta!r}")


class JitterFitError(RuntimeError):
    """Simplex search failed; carries the best point seen."""

    def __init__(self, message, best_beta=None, best_loss=None):
        super().__init__(message)
        self.best_beta = best_beta
        self.best_loss = best_loss


def jitter(y, seed) -> np.ndarray:
    """Counts plus iid Uniform(0,1) noise, deterministic per seed."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise DomainError("y must be a nonempty one-dimensional vector")
    if np.any(y < 0) or np.any(y != np.floor(y)) or not np.all(np.isfinite(y)):
        raise DomainError("y must contain nonnegative integers")
    return y + np.random.default_rng(seed).random(y.size)


def dejitter_quantile(q_continuous: float) -> int:
    """Discrete quantile recovered from a jittered one: ceil(q - 1)."""
    q = float(q_continuous)
    if not math.isfinite(q):
        raise DomainError(f"quantile must be finite, got {q_continuous!r}")
    return int(math.ceil(q - 1.0))


@njit(cache=True)
def _check_loss(X, v, alpha, beta):
    total = 0.0
    for i in range(v.size):
        r = v[i]
        for j in range(beta.size):
            r -= X[i, j] * beta[j]
        if r < 0.0:
            total += r * (alpha - 1.0)
        else:
            total += r * alpha
    return total


@njit(cache=True)
def _nelder_mead(X, v, alpha, beta0, xtol, ftol, max_iter):
    # standard reflect/expand/contract/shrink simplex on the check loss;
    # returns (beta, loss, converged)
    p = beta0.size
    m = p + 1
    simplex = np.empty((m, p))
    fvals = np.empty(m)
    for j in range(p):
        simplex[0, j] = beta0[j]
    fvals[0] = _check_loss(X, v, alpha, simplex[0])
    for k in range(p):
        for j in range(p):
            simplex[k + 1, j] = beta0[j]
        step = 0.05 * (1.0 + abs(beta0[k]))
        simplex[k + 1, k] += step
        fvals[k + 1] = _check_loss(X, v, alpha, simplex[k + 1])

    xr = np.empty(p)
    xe = np.empty(p)
    xc = np.empty(p)
    centroid = np.empty(p)
    for _ in range(max_iter):
        order = np.argsort(fvals)
        simplex = simplex[order]
        fvals = fvals[order]

        spread_x = 0.0
        spread_f = 0.0
        for k in range(1, m):
            df = abs(fvals[k] - fvals[0])
            if df > spread_f:
                spread_f = df
            for j in range(p):
                dx = abs(simplex[k, j] - simplex[0, j])
                if dx > spread_x:
                    spread_x = dx
        scale_x = 1.0 + np.max(np.abs(simplex[0]))
        if spread_x <= xtol * scale_x and spread_f <= ftol * (1.0 + abs(fvals[0])):
            return simplex[0], fvals[0], True

        for j in range(p):
            c = 0.0
            for k in range(p):
                c += simplex[k, j]
            centroid[j] = c / p

        for j in range(p):
            xr[j] = centroid[j] + (centroid[j] - simplex[m - 1, j])
        fr = _check_loss(X, v, alpha, xr)
        if fr < fvals[0]:
            for j in range(p):
                xe[j] = centroid[j] + 2.0 * (centroid[j] - simplex[m - 1, j])
            fe = _check_loss(X, v, alpha, xe)
            if fe < fr:
                simplex[m - 1] = xe
                fvals[m - 1] = fe
            else:
                simplex[m - 1] = xr
                fvals[m - 1] = fr
        elif fr < fvals[m - 2]:
            simplex[m - 1] = xr
            fvals[m - 1] = fr
        else:
            if fr < fvals[m - 1]:
                for j in range(p):
                    xc[j] = centroid[j] + 0.5 * (xr[j] - centroid[j])
            else:
                for j in range(p):
                    xc[j] = centroid[j] + 0.5 * (simplex[m - 1, j] - centroid[j])
            fc = _check_loss(X, v, alpha, xc)
            if fc < min(fr, fvals[m - 1]):
                simplex[m - 1] = xc
                fvals[m - 1] = fc
            else:
                for k in range(1, m):
                    for j in range(p):
                        simplex[k, j] = simplex[0, j] + 0.5 * (
                            simplex[k, j] - simplex[0, j])
                    fvals[k] = _check_loss(X, v, alpha, simplex[k])
    order = np.argsort(fvals)
    return simplex[order[0]], fvals[order[0]], False


def _validated_design(X, n_rows):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] != n_rows:
        raise DomainError(
            f"X has {X.shape[0]} rows but the response has {n_rows}")
    if X.shape[1] == 0:
        raise DomainError("X needs at least one column")
    if not np.all(np.isfinite(X)):
        raise DomainError("X contains non-finite values")
    return X


def fit_check_loss(X, z, alpha, zeta: float = 1e-5) -> np.ndarray:
    """Check-loss estimate for one continuous response vector.

    Minimizes sum_i rho_alpha(log(max(z_i - alpha, zeta)) - x_i' beta)
    over beta by simplex search from a least-squares start.  ``X`` is
    used as given; include a column of ones for an intercept.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise DomainError("z must be a nonempty one-dimensional vector")
    if not np.all(np.isfinite(z)):
        raise DomainError("z contains non-finite values")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not 0.0 < zeta < 1.0:
        raise DomainError(f"zeta must lie in (0, 1), got {zeta!r}")
    X = _validated_design(X, z.size)
    v = np.log(np.maximum(z - alpha, zeta))
    beta0, *_ = np.linalg.lstsq(X, v, rcond=None)
    beta, loss, converged = _nelder_mead(
        X, v, float(alpha), beta0, 1e-8, 1e-12, 400 * (X.shape[1] + 2))
    if not converged:
        raise JitterFitError(
            f"simplex search did not converge (best loss {loss:.6g})",
            best_beta=beta, best_loss=loss)
    return beta


def fit_jittered(X, y, alpha, settings: JitterSettings = JitterSettings()
                 ) -> np.ndarray:
    """Average check-loss estimate over independent jitterings of ``y``.

    Replicate j jitters with a child seed derived from
    ``(settings.seed, j)``, fits, and the m_replicates estimates are
    averaged coordinate-wise.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size == 0:
        raise DomainError("y must be a nonempty one-dimensional vector")
    if np.any(y < 0) or np.any(y != np.floor(y)) or not np.all(np.isfinite(y)):
        raise DomainError("y must contain nonnegative integers")
    X = _validated_design(X, y.size)
    total = np.zeros(X.shape[1])
    for j in range(settings.m_replicates):
        z = y + np.random.default_rng([settings.seed, j]).random(y.size)
        total += fit_check_loss(X, z, alpha, settings.zeta)
    return total / settings.m_replicates


def jittered_curve(X, beta, alpha) -> np.ndarray:
    """Fitted continuous quantile curve alpha + exp(X beta)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    beta = np.asarray(beta, dtype=float).ravel()
    if X.shape[1] != beta.size:
        raise DomainError(
            f"beta has {beta.size} entries, X has {X.shape[1]} columns")
    return alpha + np.exp(np.minimum(X @ beta, 700.0))

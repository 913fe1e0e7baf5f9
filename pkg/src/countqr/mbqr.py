"""Model-based quantile regression for count responses.

The model places the regression on a quantile of the continuous
interpolation: q_i = exp(eta_i) with eta_i = x_i' beta, then maps q_i to
the distribution parameter theta_i that makes q_i the alpha-quantile,
and maximizes the exact discrete likelihood in beta.  Because the
likelihood is the true generating one (not a working substitute), the
inverse observed information is a valid asymptotic covariance, and
exceedance probabilities follow from the Gaussian approximation of the
coefficient posterior.

Two exposure encodings are supported: ``quantile_level`` scales the
quantile itself (q_i = E_i exp(eta_i)) while ``parameter_level`` scales
the mapped parameter (theta_i = E_i h(exp(eta_i))).  They are genuinely
different models; see the exposure tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import countdist
from .countdist import (
    BinomialShape,
    FamilyShape,
    NegBinomialShape,
    PoissonShape,
)
from .specfun import (
    DEFAULT_ACCURACY,
    DomainError,
    IterationError,
    _gamma_p_kernel,
    _gamma_p_inv_scalar,
)

__all__ = [
    "QuantileModelSpec",
    "Dataset",
    "OptimizerSettings",
    "FitResult",
    "RiskReport",
    "CrossingReport",
    "FitError",
    "linear_predictor",
    "per_obs_param",
    "loglik",
    "loglik_gradient",
    "fit",
    "covariance_at",
    "exceedance",
    "quantile_curve",
    "count_crossings",
    "detect_crossings",
    "parametric_bootstrap",
]

_EXPOSURE_MODES = ("none", "quantile_level", "parameter_level")
_ETA_CLAMP = 700.0


class FitError(RuntimeError):
    """Raised when a fit cannot be produced or used."""


@dataclass(frozen=True)
class QuantileModelSpec:
    """What is being modelled: quantile level, family, exposure encoding."""

    alpha: float
    family_shape: FamilyShape = PoissonShape()
    exposure_mode: str = "none"
    covariate_names: tuple[str, ...] = ()
    intercept: bool = True

    def __post_init__(self) -> None:
        if not (isinstance(self.alpha, (int, float)) and 0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.exposure_mode not in _EXPOSURE_MODES:
            raise DomainError(
                f"exposure_mode must be one of {_EXPOSURE_MODES}, "
                f"got {self.exposure_mode!r}")
        object.__setattr__(self, "covariate_names",
                           tuple(self.covariate_names))

    @property
    def coef_names(self) -> tuple[str, ...]:
        names = tuple(self.covariate_names)
        return (("intercept",) + names) if self.intercept else names


@dataclass(frozen=True)
class Dataset:
    """Design matrix, counts, optional exposures and area labels."""

    X: np.ndarray
    y: np.ndarray
    E: np.ndarray | None = None
    area_ids: tuple | None = None

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y)
        if y.ndim != 1:
            raise DomainError("y must be one-dimensional")
        if X.shape[0] != y.size:
            raise DomainError(
                f"X has {X.shape[0]} rows but y has {y.size} entries")
        if y.size == 0:
            raise DomainError("dataset is empty")
        if not np.all(np.isfinite(X)):
            raise DomainError("X contains non-finite values")
        yf = y.astype(float)
        if np.any(yf < 0) or np.any(yf != np.floor(yf)) or not np.all(np.isfinite(yf)):
            raise DomainError("y must contain nonnegative integers")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", yf)
        if self.E is not None:
            E = np.asarray(self.E, dtype=float)
            if E.shape != (y.size,):
                raise DomainError("E must match y in length")
            if not np.all(np.isfinite(E)) or np.any(E <= 0):
                raise DomainError("E must be positive and finite")
            object.__setattr__(self, "E", E)
        if self.area_ids is not None:
            ids = tuple(self.area_ids)
            if len(ids) != y.size:
                raise DomainError("area_ids must match y in length")
            object.__setattr__(self, "area_ids", ids)

    @property
    def n_obs(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class OptimizerSettings:
    max_iter: int = 200
    grad_tol: float = 1e-8          # scaled by (1 + |loglik|)
    max_halvings: int = 40

    def __post_init__(self) -> None:
        if self.max_iter < 1 or self.max_halvings < 1 or self.grad_tol <= 0:
            raise DomainError("invalid optimizer settings")


DEFAULT_OPTIMIZER = OptimizerSettings()


@dataclass(frozen=True)
class FitResult:
    beta_hat: np.ndarray
    covariance: np.ndarray
    loglik: float
    converged: bool
    n_iter: int
    alpha: float
    spec: QuantileModelSpec
    coef_names: tuple[str, ...]
    diagnostics: dict

    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


@dataclass(frozen=True)
class RiskReport:
    """Per-area relative risks and exceedance probabilities."""

    area_ids: tuple
    theta_alpha: np.ndarray
    exceedance: np.ndarray
    high_risk: np.ndarray
    threshold: float
    alpha: float
    n_draws: int


@dataclass(frozen=True)
class CrossingReport:
    total_violations: int
    any_crossing: bool
    n_pairs_checked: int


# ---------------------------------------------------------------------------
# numba kernels for the Poisson hot path

_EPS = DEFAULT_ACCURACY.rel_tol
# the central gamma series needs O(sqrt(a)) terms; 2000 covers rates ~5e4
_ITMAX = 2000


@njit(cache=True)
def _rates_from_quantiles(q, one_minus_alpha, eps, itmax):
    # lam_i solves gamma_p(q_i + 1, lam_i) = 1 - alpha; NaN marks failure.
    # Quantiles past any plausible data scale are failed outright so that
    # wild line-search steps are rejected without grinding the solver.
    lam = np.empty(q.size)
    for i in range(q.size):
        qi = q[i]
        if not (qi < 1e12):
            lam[i] = np.nan
            continue
        lam[i] = _gamma_p_inv_scalar(qi + 1.0, one_minus_alpha, eps, itmax)
    return lam


@njit(cache=True)
def _poisson_loglik_kernel(y, lam):
    total = 0.0
    for i in range(y.size):
        li = lam[i]
        if not np.isfinite(li) or li <= 0.0:
            return -np.inf
        total += y[i] * np.log(li) - li - math.lgamma(y[i] + 1.0)
    return total


@njit(cache=True)
def _dlam_dq_kernel(q, lam, eps, itmax):
    # implicit differentiation of gamma_p(q+1, lam) = const:
    # dlam/dq = -(dP/da) / (dP/dlam), the denominator analytic
    # (lam^q e^(-lam) / Gamma(q+1)), the numerator by central difference
    out = np.empty(q.size)
    for i in range(q.size):
        qi = q[i]
        li = lam[i]
        # 5-point stencil: h**2 term cancels, so h can sit well above the
        # kernel noise floor; the bias must stay tiny because it sums
        # coherently across observations in the gradient
        h = 1e-4 * (1.0 + abs(qi))
        a = qi + 1.0
        p1 = _gamma_p_kernel(a + h, li, eps, itmax)
        m1 = _gamma_p_kernel(a - h, li, eps, itmax)
        p2 = _gamma_p_kernel(a + 2.0 * h, li, eps, itmax)
        m2 = _gamma_p_kernel(a - 2.0 * h, li, eps, itmax)
        dp_da = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
        log_pdf = qi * np.log(li) - li - math.lgamma(qi + 1.0)
        pdf = np.exp(log_pdf)
        if pdf <= 0.0 or not np.isfinite(pdf):
            out[i] = np.nan
            continue
        out[i] = -dp_da / pdf
    return out


# ---------------------------------------------------------------------------
# model pieces

def linear_predictor(spec: QuantileModelSpec, x_row, beta, E_i=None) -> float:
    """Quantile value q_i for one observation.

    q_i = exp(eta_i), scaled by E_i under ``quantile_level``.  Under
    ``parameter_level`` the exposure acts after the mapping (see
    ``per_obs_param``), so the returned quantile is unscaled.
    """
    x = np.asarray(x_row, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    if spec.intercept:
        x = np.concatenate(([1.0], x)) if x.size == beta.size - 1 else x
    if x.size != beta.size:
        raise DomainError(
            f"beta has {beta.size} entries but the row provides {x.size}")
    eta = float(x @ beta)
    q = math.exp(min(eta, _ETA_CLAMP))
    if spec.exposure_mode == "quantile_level" and E_i is not None:
        q *= float(E_i)
    return q


def per_obs_param(spec: QuantileModelSpec, q_i: float, alpha: float,
                  E_i=None) -> float:
    """Distribution parameter for one observation's quantile value."""
    theta = countdist.map_quantile_to_param(spec.family_shape, q_i, alpha)
    if spec.exposure_mode == "parameter_level" and E_i is not None:
        theta *= float(E_i)
    return theta


def _design(spec: QuantileModelSpec, dataset: Dataset) -> np.ndarray:
    X = dataset.X
    if spec.intercept:
        X = np.column_stack([np.ones(dataset.n_obs), X])
    return X


def _quantile_inputs(spec: QuantileModelSpec, dataset: Dataset,
                     beta: np.ndarray):
    """eta (clamped), the mapped argument u, and the post-map scale."""
    X = _design(spec, dataset)
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.size != X.shape[1]:
        raise DomainError(
            f"beta has {beta.size} entries, design has {X.shape[1]} columns")
    eta = X @ beta
    clamped = bool(np.any(np.abs(eta) > _ETA_CLAMP))
    eta = np.clip(eta, -_ETA_CLAMP, _ETA_CLAMP)
    u = np.exp(eta)
    scale = np.ones(dataset.n_obs)
    if dataset.E is not None:
        if spec.exposure_mode == "quantile_level":
            u = u * dataset.E
        elif spec.exposure_mode == "parameter_level":
            scale = dataset.E
    return X, eta, u, scale, clamped


def _poisson_rates(spec, dataset, beta):
    X, eta, u, scale, clamped = _quantile_inputs(spec, dataset, beta)
    lam = _rates_from_quantiles(u, 1.0 - spec.alpha, _EPS, _ITMAX) * scale
    return X, u, scale, lam, clamped


def loglik(spec: QuantileModelSpec, dataset: Dataset, beta) -> float:
    """Exact discrete log likelihood at ``beta``; -inf for invalid steps."""
    if isinstance(spec.family_shape, PoissonShape):
        _, _, _, lam, _ = _poisson_rates(spec, dataset, beta)
        return float(_poisson_loglik_kernel(dataset.y, lam))
    _, _, u, scale, _ = _quantile_inputs(spec, dataset, beta)
    total = 0.0
    for i in range(dataset.n_obs):
        try:
            theta = countdist.map_quantile_to_param(
                spec.family_shape, u[i], spec.alpha) * scale[i]
            fam = spec.family_shape.with_param(theta)
            pmf = countdist.discrete_pmf(fam, int(dataset.y[i]))
        except (ValueError, OverflowError, IterationError):
            # includes DomainError: invalid theta rejects the step
            return -math.inf
        if pmf <= 0.0:
            return -math.inf
        total += math.log(pmf)
    return total


def _loglik_and_grad(spec, dataset, beta):
    """(loglik, gradient) via the chain rule; Poisson-only fast path."""
    X, u, scale, lam, _ = _poisson_rates(spec, dataset, beta)
    value = float(_poisson_loglik_kernel(dataset.y, lam))
    if not math.isfinite(value):
        return value, None
    base = lam / scale  # the unscaled mapped parameter h(u)
    dlam_du = _dlam_dq_kernel(u, base, _EPS, _ITMAX) * scale
    # dl/dtheta = y/theta - 1 for Poisson; du/deta = u
    w = (dataset.y / lam - 1.0) * dlam_du * u
    return value, X.T @ w


def loglik_gradient(spec: QuantileModelSpec, dataset: Dataset,
                    beta) -> np.ndarray:
    """Chain-rule gradient of ``loglik`` in beta (Poisson families)."""
    if not isinstance(spec.family_shape, PoissonShape):
        return _fd_gradient(spec, dataset, np.asarray(beta, dtype=float))
    value, grad = _loglik_and_grad(spec, dataset, beta)
    if grad is None:
        raise FitError("log likelihood is not finite at beta")
    return grad


def _fd_gradient(spec, dataset, beta):
    grad = np.empty(beta.size)
    for j in range(beta.size):
        h = 1e-6 * (1.0 + abs(beta[j]))
        bp = beta.copy()
        bp[j] += h
        bm = beta.copy()
        bm[j] -= h
        grad[j] = (loglik(spec, dataset, bp) - loglik(spec, dataset, bm)) / (2 * h)
    return grad


# ---------------------------------------------------------------------------
# initialization and optimization

def _irls_poisson_mean(X, y, offset, max_iter=30, tol=1e-10):
    """Log-link Poisson mean regression, the classical IRLS loop."""
    n, p = X.shape
    mu = y + 0.5
    eta = np.log(mu) - offset
    beta = np.zeros(p)
    for _ in range(max_iter):
        mu = np.exp(np.minimum(eta + offset, _ETA_CLAMP))
        z = eta + (y - mu) / mu
        W = mu
        XtW = X.T * W
        try:
            new = np.linalg.solve(XtW @ X, XtW @ z)
        except np.linalg.LinAlgError:
            break
        if np.max(np.abs(new - beta)) < tol * (1.0 + np.max(np.abs(new))):
            beta = new
            break
        beta = new
        eta = X @ beta
    return beta


def _initial_beta(spec, dataset, X):
    # Seed from a Poisson mean fit, then move every observation onto the
    # alpha-quantile scale pointwise.  A level-only shift is not enough:
    # with large exposures a misfit start can sit below the saturated
    # low-quantile plateau and strand the optimizer there.
    offset = np.zeros(dataset.n_obs)
    if dataset.E is not None and spec.exposure_mode != "none":
        offset = np.log(dataset.E)
    beta = _irls_poisson_mean(X, dataset.y, offset)
    if spec.exposure_mode == "parameter_level":
        log_m = np.minimum(X @ beta, _ETA_CLAMP)  # per-unit mean rate
    else:
        log_m = np.minimum(X @ beta + offset, _ETA_CLAMP)
    # alpha-quantile of a count distribution with the fitted mean,
    # interpolated on a coarse grid to keep the seed cheap
    lo = max(float(np.min(log_m)), math.log(1e-6))
    hi = max(min(float(np.max(log_m)), math.log(1e8)), lo + 1e-6)
    grid = np.linspace(lo, hi, 48)
    log_q = np.empty(grid.size)
    for i, g in enumerate(grid):
        m = math.exp(g)
        try:
            qv = countdist.continuous_quantile(countdist.Poisson(m),
                                               spec.alpha)
        except Exception:
            qv = m
        # a non-positive quantile means "near zero"; a harsh floor here
        # would poison the least-squares seed below
        log_q[i] = math.log(max(qv, 0.02))
    eta_target = np.interp(np.clip(log_m, lo, hi), grid, log_q)
    if spec.exposure_mode == "quantile_level":
        eta_target = eta_target - offset
    seed, *_ = np.linalg.lstsq(X, eta_target, rcond=None)
    return seed


def fit(spec: QuantileModelSpec, dataset: Dataset, init=None,
        settings: OptimizerSettings = DEFAULT_OPTIMIZER) -> FitResult:
    """Maximize the exact likelihood by BFGS with backtracking.

    The gradient uses the chain rule through the quantile -> parameter
    mapping (implicit differentiation with an analytic denominator).
    Steps that push any observation outside the valid domain surface as
    -inf and are halved away, at most ``settings.max_halvings`` times.
    """
    X = _design(spec, dataset)
    n, p = X.shape
    if n < p or np.linalg.matrix_rank(X) < p:
        raise FitError("design matrix is rank deficient")
    if spec.covariate_names and len(spec.covariate_names) != dataset.X.shape[1]:
        raise DomainError("covariate_names length does not match X columns")
    if dataset.E is None and spec.exposure_mode != "none":
        raise DomainError(f"exposure_mode={spec.exposure_mode!r} needs E")
    if dataset.E is not None and spec.exposure_mode == "none":
        raise DomainError("exposure_mode='none' forbids an exposure column")

    if not isinstance(spec.family_shape, PoissonShape):
        value_grad = lambda b: (loglik(spec, dataset, b),
                                _fd_gradient(spec, dataset, b))
    else:
        value_grad = lambda b: _loglik_and_grad(spec, dataset, b)

    beta = (np.asarray(init, dtype=float).ravel().copy()
            if init is not None else _initial_beta(spec, dataset, X))
    if beta.size != p:
        raise DomainError(f"init has {beta.size} entries, expected {p}")

    value, grad = value_grad(beta)
    if not math.isfinite(value) or grad is None:
        raise FitError("log likelihood is not finite at the starting point")

    H = np.eye(p)  # inverse-Hessian approximation of -loglik
    converged = False
    n_iter = 0
    eta_clamped = False
    for n_iter in range(1, settings.max_iter + 1):
        if np.max(np.abs(grad)) < settings.grad_tol * (1.0 + abs(value)):
            converged = True
            n_iter -= 1
            break
        direction = H @ grad
        if float(direction @ grad) <= 0.0:
            H = np.eye(p)
            direction = grad.copy()
        step = 1.0
        slope = float(direction @ grad)
        accepted = False
        for _ in range(settings.max_halvings):
            cand = beta + step * direction
            cand_value = loglik(spec, dataset, cand)
            if math.isfinite(cand_value) and (
                    cand_value >= value + 1e-4 * step * slope):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        new_beta = beta + step * direction
        new_value, new_grad = value_grad(new_beta)
        if new_grad is None:
            break
        s = new_beta - beta
        # near the optimum the finite-difference part of the gradient has a
        # small bias floor; accept stationarity of value and step instead,
        # but only when the gradient is already within 100x its tolerance
        if (abs(new_value - value) <= 1e-12 * (1.0 + abs(new_value))
                and np.max(np.abs(s)) <= 1e-10 * (1.0 + np.max(np.abs(new_beta)))
                and np.max(np.abs(new_grad)) < 100.0 * settings.grad_tol
                * (1.0 + abs(new_value))):
            beta, value, grad = new_beta, new_value, new_grad
            converged = True
            break
        yk = grad - new_grad  # gradient of -l increases along s
        sy = float(s @ yk)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(yk) + 1e-300):
            rho = 1.0 / sy
            I = np.eye(p)
            V = I - rho * np.outer(s, yk)
            H = V @ H @ V.T + rho * np.outer(s, s)
        beta, value, grad = new_beta, new_value, new_grad
    else:
        n_iter = settings.max_iter

    if not converged and np.max(np.abs(grad)) < settings.grad_tol * (
            1.0 + abs(value)):
        converged = True

    _, _, _, _, eta_clamped = _quantile_inputs(spec, dataset, beta)
    cov, cov_fallback = covariance_at(spec, dataset, beta)
    diagnostics = {
        "grad_max": float(np.max(np.abs(grad))),
        "eta_clamped": eta_clamped,
        "covariance_fallback": cov_fallback,
    }
    return FitResult(
        beta_hat=beta, covariance=cov, loglik=value, converged=converged,
        n_iter=n_iter, alpha=spec.alpha, spec=spec,
        coef_names=spec.coef_names, diagnostics=diagnostics)


def covariance_at(spec: QuantileModelSpec, dataset: Dataset,
                  beta) -> tuple[np.ndarray, bool]:
    """Inverse negative Hessian of the log likelihood at ``beta``.

    Central differences with per-coordinate steps 1e-5 (1 + |beta_j|);
    the Hessian is symmetrized before inversion.  Returns (covariance,
    used_pseudo_inverse_fallback).
    """
    beta = np.asarray(beta, dtype=float).ravel()
    p = beta.size
    h = 1e-5 * (1.0 + np.abs(beta))
    f0 = loglik(spec, dataset, beta)
    H = np.empty((p, p))
    for j in range(p):
        ej = np.zeros(p)
        ej[j] = h[j]
        H[j, j] = (loglik(spec, dataset, beta + ej) - 2.0 * f0
                   + loglik(spec, dataset, beta - ej)) / h[j] ** 2
        for k in range(j + 1, p):
            ek = np.zeros(p)
            ek[k] = h[k]
            H[j, k] = H[k, j] = (
                loglik(spec, dataset, beta + ej + ek)
                - loglik(spec, dataset, beta + ej - ek)
                - loglik(spec, dataset, beta - ej + ek)
                + loglik(spec, dataset, beta - ej - ek)
            ) / (4.0 * h[j] * h[k])
    neg_H = -(H + H.T) / 2.0
    try:
        cov = np.linalg.inv(neg_H)
        if not np.all(np.isfinite(cov)) or np.any(np.diag(cov) <= 0):
            raise np.linalg.LinAlgError
        fallback = False
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(neg_H)
        fallback = True
    return (cov + cov.T) / 2.0, fallback


# ---------------------------------------------------------------------------
# downstream consumers

def quantile_curve(fit_result: FitResult, X) -> np.ndarray:
    """Fitted quantile values exp(eta) at the given covariate rows."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if fit_result.spec.intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    eta = np.minimum(X @ fit_result.beta_hat, _ETA_CLAMP)
    return np.exp(eta)


def exceedance(fit_result: FitResult, dataset: Dataset, n_draws: int = 10_000,
               seed=None, threshold: float = 0.95) -> RiskReport:
    """Per-area pr(theta_i > 1) under the Gaussian coefficient
    approximation, with theta on the relative-risk scale exp(eta)."""
    if not fit_result.converged:
        raise FitError("refusing exceedance computation on a non-converged fit")
    if not 0.0 <= threshold <= 1.0:
        raise DomainError(f"threshold must be in [0, 1], got {threshold!r}")
    if n_draws < 1:
        raise DomainError("n_draws must be >= 1")
    X = _design(fit_result.spec, dataset)
    rng = np.random.default_rng(seed)
    draws = rng.multivariate_normal(fit_result.beta_hat,
                                    fit_result.covariance, size=n_draws)
    eta_draws = draws @ X.T  # n_draws x n_areas
    exc = np.mean(eta_draws > 0.0, axis=0)
    theta = np.exp(np.minimum(X @ fit_result.beta_hat, _ETA_CLAMP))
    ids = dataset.area_ids or tuple(range(dataset.n_obs))
    return RiskReport(
        area_ids=ids, theta_alpha=theta, exceedance=exc,
        high_risk=exc >= threshold, threshold=threshold,
        alpha=fit_result.alpha, n_draws=n_draws)


def count_crossings(curves: np.ndarray, alphas, tol: float = 1e-9
                    ) -> CrossingReport:
    """Count violations of the quantile ordering across an alpha grid.

    ``curves[j, m]`` is the fitted quantile at level ``alphas[j]`` and
    evaluation point m; adjacent levels must satisfy
    curve_j <= curve_k + tol whenever alpha_j < alpha_k.
    """
    curves = np.asarray(curves, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if curves.ndim != 2 or curves.shape[0] != alphas.size:
        raise DomainError("curves must be (n_alphas, n_points)")
    order = np.argsort(alphas)
    curves = curves[order]
    lower, upper = curves[:-1], curves[1:]
    violations = int(np.sum(lower > upper + tol))
    pairs = int(lower.size)
    return CrossingReport(total_violations=violations,
                          any_crossing=violations > 0,
                          n_pairs_checked=pairs)


def detect_crossings(fits, eval_points, tol: float = 1e-9) -> CrossingReport:
    """Crossing check for a family of fits over an alpha grid."""
    fits = list(fits)
    if not fits:
        raise DomainError("no fits supplied")
    alphas = np.array([f.alpha for f in fits])
    curves = np.vstack([quantile_curve(f, eval_points) for f in fits])
    return count_crossings(curves, alphas, tol)


def parametric_bootstrap(spec: QuantileModelSpec, dataset: Dataset,
                         fit_result: FitResult, n_boot: int = 200,
                         seed=None) -> np.ndarray:
    """Covariance of beta_hat by refitting on counts resampled from the
    fitted model; the small-sample check behind the --bootstrap flag."""
    if not isinstance(spec.family_shape, PoissonShape):
        raise FitError("bootstrap is implemented for Poisson families")
    if n_boot < 2:
        raise DomainError("n_boot must be >= 2")
    _, _, _, lam, _ = _poisson_rates(spec, dataset, fit_result.beta_hat)
    rng = np.random.default_rng(seed)
    draws = np.empty((n_boot, fit_result.beta_hat.size))
    for b in range(n_boot):
        y_star = rng.poisson(lam)
        boot_data = Dataset(X=dataset.X, y=y_star, E=dataset.E,
                            area_ids=dataset.area_ids)
        res = fit(spec, boot_data, init=fit_result.beta_hat)
        draws[b] = res.beta_hat
    centred = draws - draws.mean(axis=0)
    return centred.T @ centred / (n_boot - 1)

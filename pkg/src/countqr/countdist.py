"""Count distributions and their continuous interpolations.

Three discrete families (Poisson, Binomial, Negative Binomial) are paired
with continuous distributions on ``(-1, hi]`` whose CDFs agree with the
discrete CDFs at every integer of the support.  The continuous families
are what make quantile levels identifiable for count responses: their
CDFs are strictly increasing, so quantile -> parameter and parameter ->
quantile are honest inverses (``map_quantile_to_param`` /
``map_param_to_quantile``), and inverse-CDF sampling is well defined.

All functions are pure; family objects are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .specfun import (
    Accuracy,
    DEFAULT_ACCURACY,
    DomainError,
    beta_inc,
    beta_inc_inv,
    gamma_p_inv,
    gamma_q,
    log_gamma,
)

__all__ = [
    "Poisson",
    "Binomial",
    "NegBinomial",
    "PoissonShape",
    "BinomialShape",
    "NegBinomialShape",
    "LimitGridSpec",
    "LimitReport",
    "support",
    "discrete_pmf",
    "discrete_cdf",
    "discrete_quantile",
    "continuous_cdf",
    "continuous_quantile",
    "map_quantile_to_param",
    "map_param_to_quantile",
    "sample",
    "sample_discrete",
    "verify_limit_relations",
]


def _require_prob(p: float, name: str) -> None:
    if not (isinstance(p, (int, float)) and math.isfinite(p) and 0.0 < p < 1.0):
        raise DomainError(f"{name} must lie strictly in (0, 1), got {p!r}")


@dataclass(frozen=True)
class Poisson:
    """Poisson family with rate ``lam``."""

    lam: float

    def __post_init__(self) -> None:
        if not (isinstance(self.lam, (int, float)) and math.isfinite(self.lam)
                and self.lam > 0.0):
            raise DomainError(f"lam must be finite and positive, got {self.lam!r}")


@dataclass(frozen=True)
class Binomial:
    """Binomial family: ``n`` trials, success probability ``p``."""

    n: int
    p: float

    def __post_init__(self) -> None:
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise DomainError(f"n must be an integer >= 1, got {self.n!r}")
        _require_prob(self.p, "p")


@dataclass(frozen=True)
class NegBinomial:
    """Negative Binomial family of size ``r``.

    ``p`` is oriented so the pmf at k failures before the r-th success is
    C(k+r-1, k) (1-p)^r p^k, i.e. the success probability is ``1 - p``.
    This is the orientation under which the continuous CDF
    I_{1-p}(r, z+1) matches the discrete CDF at integers.
    """

    r: float
    p: float

    def __post_init__(self) -> None:
        if not (isinstance(self.r, (int, float)) and math.isfinite(self.r)
                and self.r > 0.0):
            raise DomainError(f"r must be finite and positive, got {self.r!r}")
        _require_prob(self.p, "p")


CountFamily = Poisson | Binomial | NegBinomial


@dataclass(frozen=True)
class PoissonShape:
    """Shape of a Poisson family: no fixed parameters, lam is modelled."""

    def with_param(self, lam: float) -> Poisson:
        return Poisson(lam)


@dataclass(frozen=True)
class BinomialShape:
    """Binomial shape with fixed trial count; p is the modelled parameter."""

    n: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise DomainError(f"n must be an integer >= 1, got {self.n!r}")

    def with_param(self, p: float) -> Binomial:
        return Binomial(self.n, p)


@dataclass(frozen=True)
class NegBinomialShape:
    """Negative Binomial shape with fixed size r; p is modelled."""

    r: float

    def __post_init__(self) -> None:
        if not (isinstance(self.r, (int, float)) and math.isfinite(self.r)
                and self.r > 0.0):
            raise DomainError(f"r must be finite and positive, got {self.r!r}")

    def with_param(self, p: float) -> NegBinomial:
        return NegBinomial(self.r, p)


FamilyShape = PoissonShape | BinomialShape | NegBinomialShape


def support(family: CountFamily) -> tuple[float, float]:
    """Continuous support ``(lo, hi]`` of the interpolated family."""
    hi = float(family.n) if isinstance(family, Binomial) else math.inf
    return -1.0, hi


def _check_count(family: CountFamily, k) -> int:
    if isinstance(k, float) and not k.is_integer():
        raise DomainError(f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if isinstance(family, Binomial) and k > family.n:
        raise DomainError(f"k must be <= n = {family.n}, got {k}")
    return k


def discrete_pmf(family: CountFamily, k) -> float:
    """Probability mass at the nonnegative integer ``k``.

    Evaluated in log space through ``log_gamma`` and exponentiated, so
    large counts and extreme parameters do not overflow intermediate
    factorials.
    """
    k = _check_count(family, k)
    if isinstance(family, Poisson):
        lam = family.lam
        return math.exp(k * math.log(lam) - lam - log_gamma(k + 1.0))
    if isinstance(family, Binomial):
        n, p = family.n, family.p
        log_choose = (log_gamma(n + 1.0) - log_gamma(k + 1.0)
                      - log_gamma(n - k + 1.0))
        return math.exp(log_choose + k * math.log(p) + (n - k) * math.log1p(-p))
    r, p = family.r, family.p
    log_coeff = log_gamma(k + r) - log_gamma(r) - log_gamma(k + 1.0)
    return math.exp(log_coeff + r * math.log1p(-p) + k * math.log(p))


def discrete_cdf(family: CountFamily, k,
                 accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """P(K <= floor(k)), computed through the incomplete gamma/beta forms."""
    if isinstance(k, float) and math.isnan(k):
        raise DomainError("k must not be NaN")
    k = math.floor(k)
    if k < 0:
        return 0.0
    if isinstance(family, Poisson):
        return gamma_q(k + 1.0, family.lam, accuracy)
    if isinstance(family, Binomial):
        if k >= family.n:
            return 1.0
        return beta_inc(family.n - k, k + 1.0, 1.0 - family.p, accuracy)
    return beta_inc(family.r, k + 1.0, 1.0 - family.p, accuracy)


def continuous_cdf(family: CountFamily, x: float,
                   accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """CDF of the continuous interpolation at the real point ``x``.

    Poisson: gamma_q(x+1, lam) on x > -1.  Binomial: I_{1-p}(n-x, x+1) on
    (-1, n], clamped to 1 at x = n.  NegBinomial: I_{1-p}(r, x+1).
    Below the support the value is 0, beyond it 1.  At every integer k of
    the support this equals ``discrete_cdf(family, k)``.
    """
    if isinstance(x, float) and math.isnan(x):
        raise DomainError("x must not be NaN")
    x = float(x)
    if x <= -1.0:
        return 0.0
    if isinstance(family, Poisson):
        return gamma_q(x + 1.0, family.lam, accuracy)
    if isinstance(family, Binomial):
        if x >= family.n:
            return 1.0
        return beta_inc(family.n - x, x + 1.0, 1.0 - family.p, accuracy)
    return beta_inc(family.r, x + 1.0, 1.0 - family.p, accuracy)


def _snap_to_integer(family: CountFamily, x: float, alpha: float,
                     accuracy: Accuracy) -> float:
    # alpha hitting a discrete mass point exactly means the quantile is the
    # integer itself; return it without root-finder fuzz
    k = round(x)
    if k >= 0 and abs(x - k) <= 1e-8:
        if not (isinstance(family, Binomial) and k > family.n):
            fk = continuous_cdf(family, float(k), accuracy)
            if abs(fk - alpha) <= 1e-12 * max(alpha, 1.0 - alpha):
                return float(k)
    return x


def continuous_quantile(family: CountFamily, alpha: float,
                        accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """The x with ``continuous_cdf(family, x) = alpha``, to 1e-10.

    Solved by bracketed root finding over the support; the bracket grows
    geometrically until it straddles alpha.  When alpha equals the CDF at
    an integer, that exact integer is returned.
    """
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie strictly in (0, 1), got {alpha!r}")
    alpha = float(alpha)
    lo, hi = support(family)
    lo += 1e-13
    if math.isinf(hi):
        hi = 1.0
        while continuous_cdf(family, hi, accuracy) < alpha:
            hi *= 2.0
            if hi > 1e300:  # pragma: no cover - unreachable for valid alpha
                raise DomainError("failed to bracket the quantile")
    f = lambda x: continuous_cdf(family, x, accuracy) - alpha
    root = optimize.brentq(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps)
    return _snap_to_integer(family, root, alpha, accuracy)


def discrete_quantile(family: CountFamily, alpha: float) -> int:
    """Smallest integer k with ``discrete_cdf(family, k) >= alpha``."""
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie strictly in (0, 1), got {alpha!r}")
    k = 0
    hi = family.n if isinstance(family, Binomial) else None
    while discrete_cdf(family, k) < alpha:
        if hi is not None and k >= hi:
            break
        k += 1
    return k


def map_quantile_to_param(shape: FamilyShape, q: float, alpha: float,
                          accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """Parameter theta such that the alpha-quantile of the continuous
    family equals q, i.e. ``continuous_cdf(shape.with_param(theta), q) =
    alpha``.

    Poisson: lam = gamma_p_inv(q+1, 1-alpha).  Binomial: p = 1 -
    beta_inc_inv(n-q, q+1, alpha).  NegBinomial: p = 1 - beta_inc_inv(r,
    q+1, alpha).
    """
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise DomainError(f"alpha must lie strictly in (0, 1), got {alpha!r}")
    if not (isinstance(q, (int, float)) and math.isfinite(q)):
        raise DomainError(f"q must be finite, got {q!r}")
    q = float(q)
    alpha = float(alpha)
    if q <= -1.0:
        raise DomainError(f"q must exceed the support floor -1, got {q}")
    if isinstance(shape, PoissonShape):
        return gamma_p_inv(q + 1.0, 1.0 - alpha, accuracy)
    if isinstance(shape, BinomialShape):
        if q >= shape.n:
            raise DomainError(f"q must be below n = {shape.n}, got {q}")
        return 1.0 - beta_inc_inv(shape.n - q, q + 1.0, alpha, accuracy)
    return 1.0 - beta_inc_inv(shape.r, q + 1.0, alpha, accuracy)


def map_param_to_quantile(family: CountFamily, alpha: float,
                          accuracy: Accuracy = DEFAULT_ACCURACY) -> float:
    """Named inverse of ``map_quantile_to_param``: the alpha-quantile of
    the continuous family currently parametrized by ``family``."""
    return continuous_quantile(family, alpha, accuracy)


def sample(family: CountFamily, rng_seed, count: int) -> np.ndarray:
    """``count`` draws of the continuous variable by inverse-CDF sampling."""
    if count < 0:
        raise DomainError(f"count must be >= 0, got {count}")
    rng = np.random.default_rng(rng_seed)
    u = rng.random(count)
    return np.array([continuous_quantile(family, ui) for ui in u])


def sample_discrete(family: CountFamily, rng_seed, count: int) -> np.ndarray:
    """Discrete draws: the ceiling of the continuous samples."""
    return np.ceil(sample(family, rng_seed, count)) + 0.0


@dataclass(frozen=True)
class LimitGridSpec:
    """Grids over which the limit relations are checked."""

    lambdas: tuple[float, ...] = (1.0, 2.0, 5.0)
    sizes: tuple[int, ...] = (100, 1000, 10000)
    x_grid: tuple[float, ...] = tuple(np.arange(-0.5, 15.01, 0.5))
    identity_sizes: tuple[int, ...] = (1, 2, 3, 4, 5)
    identity_probs: tuple[float, ...] = (0.2, 0.5, 0.8)
    identity_tol: float = 1e-10
    final_gap_bound: float = 5e-3


@dataclass(frozen=True)
class LimitReport:
    """Outcome of ``verify_limit_relations``.

    ``binomial_gaps`` and ``negbin_gaps`` map each lambda to the sup-CDF
    gaps versus the continuous Poisson, ordered as the sizes grid.
    """

    binomial_gaps: dict[float, tuple[float, ...]]
    negbin_gaps: dict[float, tuple[float, ...]]
    binomial_decreasing: bool
    negbin_decreasing: bool
    final_gap_bound_met: bool
    identity_max_gap: float
    identity_ok: bool
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "passed",
            self.binomial_decreasing and self.negbin_decreasing
            and self.final_gap_bound_met and self.identity_ok)


def verify_limit_relations(grid_spec: LimitGridSpec | None = None,
                           accuracy: Accuracy | None = None) -> LimitReport:
    """Numerically check the three limit relations tying the families.

    (i) sup_x |F_Binomial(n, lam/n)(x) - F_Poisson(lam)(x)| shrinks as n
    grows; (ii) the same for NegBinomial(r, lam/r) as r grows; (iii)
    F_NegBin(r,p)(s) = 1 - F_Binomial(s+r, 1-p)(r-1) exactly (to 1e-10)
    on the identity grid.
    """
    spec = grid_spec or LimitGridSpec()
    # large first beta argument needs more continued-fraction iterations
    acc = accuracy or Accuracy(rel_tol=DEFAULT_ACCURACY.rel_tol, max_iter=2000)

    def sup_gap(make_family, lam: float, size: int) -> float:
        pois = Poisson(lam)
        gaps = [abs(continuous_cdf(make_family(lam, size), x, acc)
                    - continuous_cdf(pois, x, acc))
                for x in spec.x_grid]
        return max(gaps)

    def binom_approx(lam: float, n: int) -> Binomial:
        return Binomial(n, lam / n)

    def negbin_approx(lam: float, r: int) -> NegBinomial:
        return NegBinomial(float(r), lam / r)

    binomial_gaps = {lam: tuple(sup_gap(binom_approx, lam, n)
                                for n in spec.sizes)
                     for lam in spec.lambdas}
    negbin_gaps = {lam: tuple(sup_gap(negbin_approx, lam, r)
                              for r in spec.sizes)
                   for lam in spec.lambdas}

    def decreasing(gaps: dict[float, tuple[float, ...]]) -> bool:
        return all(g1 > g2 for seq in gaps.values()
                   for g1, g2 in zip(seq, seq[1:]))

    final_ok = all(seq[-1] < spec.final_gap_bound
                   for gaps in (binomial_gaps, negbin_gaps)
                   for seq in gaps.values())

    identity_max = 0.0
    for s in spec.identity_sizes:
        for r in spec.identity_sizes:
            for p in spec.identity_probs:
                lhs = continuous_cdf(NegBinomial(float(r), p), float(s), acc)
                mirror = Binomial(s + r, 1.0 - p)
                rhs = 1.0 - continuous_cdf(mirror, float(r - 1), acc)
                identity_max = max(identity_max, abs(lhs - rhs))

    return LimitReport(
        binomial_gaps=binomial_gaps,
        negbin_gaps=negbin_gaps,
        binomial_decreasing=decreasing(binomial_gaps),
        negbin_decreasing=decreasing(negbin_gaps),
        final_gap_bound_met=final_ok,
        identity_max_gap=identity_max,
        identity_ok=identity_max <= spec.identity_tol,
    )

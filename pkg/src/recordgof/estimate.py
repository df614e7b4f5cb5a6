"""Maximum-likelihood fitting and the nonparametric survival estimator for records.

For record data the Weibull log-likelihood is

    l(alpha, sigma) = m log(alpha) - m alpha log(sigma)
                      + (alpha - 1) sum log(r_i) - sigma^(-alpha) sum k_i r_i^alpha.

Profiling out sigma gives sigma^alpha = (1/m) sum k_i r_i^alpha, and alpha
solves h(alpha) = mean(log r_i) with

    h(alpha) = sum k_i r_i^alpha log r_i / sum k_i r_i^alpha - 1/alpha,

which is strictly increasing, so a bracketing bisection finds the unique root.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .dist import ExponentialParams, WeibullParams
from .records import RecordSample, ordered_view


class EstimationError(ValueError):
    """Not enough data for the requested fit."""


class SolverRangeError(ArithmeticError):
    """The root of h(alpha) could not be bracketed or resolved."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SolverOptions:
    bracket: tuple = (0.5, 2.0)
    expand: float = 2.0
    max_expansions: int = 60
    tol: float = 1e-11
    max_iter: int = 200


@dataclass(frozen=True)
class WeibullFit:
    params: WeibullParams
    loglik: float
    iterations: int
    bracket: tuple
    residual: float

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def sigma(self):
        return self.params.sigma

    def to_dict(self):
        return {
            "model": "weibull",
            "alpha": self.alpha,
            "sigma": self.sigma,
            "loglik": self.loglik,
            "iterations": self.iterations,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class ExponentialFit:
    params: ExponentialParams
    loglik: float

    @property
    def sigma(self):
        return self.params.sigma

    def to_dict(self):
        return {
            "model": "exponential",
            "alpha": 1.0,
            "sigma": self.sigma,
            "loglik": self.loglik,
            "iterations": 0,
            "residual": 0.0,
        }


def _weighted_log_moments(logs, k, alpha):
    """sum k exp(alpha (L - Lmax)) and the same weighted by L.

    The common shift exp(-alpha Lmax) cancels in every ratio used here.
    """
    shift = max(logs)
    s0 = 0.0
    s1 = 0.0
    for L, c in zip(logs, k):
        w = c * math.exp(alpha * (L - shift))
        s0 += w
        s1 += w * L
    return s0, s1, shift


def _h(logs, k, alpha):
    s0, s1, _ = _weighted_log_moments(logs, k, alpha)
    value = s1 / s0 - 1.0 / alpha
    if not math.isfinite(value):
        raise SolverRangeError(f"h(alpha) is not finite at alpha={alpha!r}", alpha=alpha)
    return value


def h_alpha(rs, alpha):
    """The profile-score function h(alpha) for record data ``rs``."""
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be finite and > 0, got {alpha!r}")
    return _h([math.log(v) for v in rs.r], rs.k, float(alpha))


def _sigma_given_alpha(logs, k, alpha, m):
    s0, _, shift = _weighted_log_moments(logs, k, alpha)
    return math.exp(shift + math.log(s0 / m) / alpha)


def weibull_loglik(rs, alpha, sigma):
    """Record-data Weibull log-likelihood at (alpha, sigma)."""
    logs = [math.log(v) for v in rs.r]
    m = rs.m
    ls = math.log(sigma)
    tail = sum(c * math.exp(alpha * (L - ls)) for L, c in zip(logs, rs.k))
    return m * math.log(alpha) - m * alpha * ls + (alpha - 1.0) * sum(logs) - tail


def exponential_loglik(rs, sigma):
    return -rs.m * math.log(sigma) - sum(c * v for v, c in zip(rs.r, rs.k)) / sigma


def fit_exponential(rs):
    """MLE of the exponential mean from records: sum(k_i r_i) / m."""
    if rs.m < 1:
        raise EstimationError("exponential fit needs at least one record")
    sigma0 = sum(c * v for v, c in zip(rs.r, rs.k)) / rs.m
    return ExponentialFit(ExponentialParams(sigma0), -rs.m * math.log(sigma0) - rs.m)


def _solve_alpha(logs, k, opts):
    m = len(logs)
    target = sum(logs) / m

    def g(a):
        return _h(logs, k, a) - target

    lo, hi = opts.bracket
    g_lo, g_hi = g(lo), g(hi)
    expansions = 0
    while g_lo > 0 or g_hi < 0:
        if expansions >= opts.max_expansions:
            raise SolverRangeError(
                "could not bracket the root of h(alpha)",
                bracket=(lo, hi),
                g=(g_lo, g_hi),
                expansions=expansions,
            )
        if g_lo > 0:
            lo, hi, g_hi = lo / opts.expand, lo, g_lo
            g_lo = g(lo)
        else:
            lo, hi, g_lo = hi, hi * opts.expand, g_hi
            g_hi = g(hi)
        expansions += 1
    bracket = (lo, hi)

    best, best_g = (lo, g_lo) if abs(g_lo) <= abs(g_hi) else (hi, g_hi)
    it = 0
    while abs(best_g) > opts.tol and it < opts.max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        it += 1
        if abs(g_mid) < abs(best_g):
            best, best_g = mid, g_mid
        if g_mid < 0:
            lo = mid
        else:
            hi = mid
    if abs(best_g) > opts.tol:
        raise SolverRangeError(
            "bisection stopped before reaching tolerance",
            alpha=best,
            residual=abs(best_g),
            iterations=it,
            bracket=bracket,
        )
    return best, it, bracket, abs(best_g)


def fit_weibull(rs, opts=None):
    """Weibull MLE from record data.

    Parameters
    ----------
    rs : RecordSample
        Needs at least two records.
    opts : SolverOptions, optional
        Initial bracket, expansion factor and bisection tolerance.

    Returns
    -------
    WeibullFit
        ``residual`` is ``|h(alpha_hat) - mean(log r)|``; ``sigma`` is
        computed from ``alpha_hat`` by the profile equation.

    Raises
    ------
    EstimationError
        Fewer than two records.
    SolverRangeError
        The root could not be bracketed or the tolerance was not reached.
    """
    if rs.m < 2:
        raise EstimationError(f"Weibull fit needs at least 2 records, got m={rs.m}")
    opts = opts or SolverOptions()
    logs = [math.log(v) for v in rs.r]
    alpha, it, bracket, residual = _solve_alpha(logs, rs.k, opts)
    sigma = _sigma_given_alpha(logs, rs.k, alpha, rs.m)
    m = rs.m
    # sigma^-alpha sum k r^alpha == m at the profile optimum
    loglik = m * math.log(alpha) - m * alpha * math.log(sigma) + (alpha - 1.0) * sum(logs) - m
    return WeibullFit(WeibullParams(alpha, sigma), loglik, it, bracket, residual)


def loglik_grid(rs, alphas, sigmas):
    """Log-likelihood on the (alpha, sigma) grid, shape (len(alphas), len(sigmas))."""
    out = np.empty((len(alphas), len(sigmas)))
    for i, a in enumerate(alphas):
        for j, s in enumerate(sigmas):
            out[i, j] = weibull_loglik(rs, float(a), float(s))
    return out


@dataclass(frozen=True)
class SurvivalStep:
    """Right-continuous step survival function from record data.

    ``surv[i]`` is the value on ``[jumps[i], jumps[i + 1])``; the function is
    1 below ``jumps[0]`` and ``surv[-1]`` beyond the last jump.
    """

    jumps: np.ndarray
    phi: np.ndarray
    surv: np.ndarray = field(repr=False)

    @property
    def m(self):
        return len(self.jumps)

    def before(self):
        """Survival level on each segment ending at a jump: (1, S_1, ..., S_{m-1})."""
        return np.concatenate(([1.0], self.surv[:-1]))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        levels = np.concatenate(([1.0], self.surv))
        out = levels[np.searchsorted(self.jumps, x, side="right")]
        return float(out) if out.ndim == 0 else out

    evaluate = __call__


def _product_limit(values, counts):
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=float)
    at_risk = np.cumsum(counts[::-1])[::-1]
    phi = (at_risk - 1.0) / at_risk
    return SurvivalStep(values, phi, np.cumprod(phi))


def npmle(rs):
    """Nonparametric MLE of the survival function from random-scheme records.

    >>> s = npmle(RecordSample([5.0], [3]))
    >>> float(s.surv[0])
    0.6666666666666666
    """
    if rs.scheme != "random":
        raise EstimationError("the record NPMLE is defined for random-scheme samples")
    view = ordered_view(rs)
    return _product_limit(view.r_ord, view.k_ord)


def npmle_pooled(samples):
    """NPMLE from L independent random-scheme record samples combined.

    Records from all samples are merged in increasing order with their counts
    attached. Equal values from different samples keep sample order
    (stable sort), each contributing its own factor.
    """
    samples = list(samples)
    if not samples:
        raise EstimationError("need at least one record sample to pool")
    for s in samples:
        if s.scheme != "random":
            raise EstimationError("the record NPMLE is defined for random-scheme samples")
    values = np.concatenate([ordered_view(s).r_ord for s in samples])
    counts = np.concatenate([ordered_view(s).k_ord for s in samples])
    order = np.argsort(values, kind="stable")
    return _product_limit(values[order], counts[order])


__all__ = [
    "EstimationError",
    "ExponentialFit",
    "RecordSample",
    "SolverOptions",
    "SolverRangeError",
    "SurvivalStep",
    "WeibullFit",
    "exponential_loglik",
    "fit_exponential",
    "fit_weibull",
    "h_alpha",
    "loglik_grid",
    "npmle",
    "npmle_pooled",
    "weibull_loglik",
]

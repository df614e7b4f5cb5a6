"""Goodness-of-fit statistics for record data and the GLR test of exponentiality.

Let S_(0) = 1 and S_(i) = Phi_1 ... Phi_i be the record NPMLE of the
survival function at the ordered records r_(1) < ... < r_(m), with sentinels
r_(0) = 0 and r_(m+1) = +inf. For a hypothesized cdf F0 with survival
Fbar0 the three distances reduce to finite sums:

    D   = max_i max{S_(i-1) - Fbar0(r_(i)), Fbar0(r_(i)) - S_(i)},  i = 1..m
    W^2 = n/3 sum_{i=1}^{m+1} [S_(i-1) - Fbar0(r_(i))]^3 - [S_(i-1) - Fbar0(r_(i-1))]^3
    DS  = n [sum A_i^2 dlog F0 + 2 sum A_i dF0 + 1/2],  A_i = S_(i-1) - 1

where the last two are the CvM integral n int (Fhat - F0)^2 dF0 and the
left-tail weighted version with weight 1/F0.
"""

from dataclasses import dataclass
import math
from statistics import NormalDist

import numpy as np
from scipy import integrate

from .dist import weibull_cdf, weibull_logcdf, weibull_quantile, weibull_sf
from .estimate import exponential_loglik, fit_exponential, fit_weibull, npmle, weibull_loglik
from .records import ordered_view

STATISTICS = ("ks", "cm", "ds")


class GofError(ArithmeticError):
    """A statistic evaluated to a non-finite value."""


class OracleError(RuntimeError):
    """The quadrature oracle did not reach its error tolerance."""


@dataclass(frozen=True)
class GofStatistics:
    d_n: float
    w2_n: float
    ds_n: float
    n: int

    def as_dict(self):
        return {"ks": self.d_n, "cm": self.w2_n, "ds": self.ds_n}


@dataclass(frozen=True)
class GofResult:
    statistic: str
    value: float
    gamma: float
    critical_value: float
    reject: bool

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "value": self.value,
            "gamma": self.gamma,
            "critical": self.critical_value,
            "reject": self.reject,
        }


@dataclass(frozen=True)
class GlrResult:
    lambda_: float
    neg2loglambda: float
    p_value: float
    sigma0: float
    weibull_fit: object

    def critical_value(self, gamma):
        """chi-square(1) quantile at 1 - gamma."""
        return chi2_1_quantile(1.0 - gamma)

    def reject(self, gamma):
        return self.neg2loglambda > self.critical_value(gamma)

    def to_dict(self, gamma=0.05):
        return {
            "statistic": "glr",
            "value": self.neg2loglambda,
            "lambda": self.lambda_,
            "gamma": gamma,
            "critical": self.critical_value(gamma),
            "critical_lambda": math.exp(-0.5 * self.critical_value(gamma)),
            "reject": self.reject(gamma),
            "p_value": self.p_value,
        }


def _log_cdf_from_log_hazard(log_z):
    if log_z < -20.0:
        return log_z - 0.5 * math.exp(log_z)
    return math.log(-math.expm1(-math.exp(log_z)))


def _fitted_terms(r_ord, alpha, sigma):
    """Survival, cdf and log-cdf of W(alpha, sigma) at each ordered record."""
    ls = math.log(sigma)
    sf, cdf, logcdf = [], [], []
    for v in r_ord:
        log_z = alpha * (math.log(v) - ls)
        z = math.exp(log_z)
        sf.append(math.exp(-z))
        cdf.append(-math.expm1(-z))
        logcdf.append(_log_cdf_from_log_hazard(log_z))
    return sf, cdf, logcdf


def _product_limit(k_ord):
    at_risk = sum(k_ord)
    surv = []
    s = 1.0
    for c in k_ord:
        s *= (at_risk - 1.0) / at_risk
        surv.append(s)
        at_risk -= c
    return surv


def _sums(k_ord, sf, cdf, logcdf, n):
    """(D, W^2, DS) from hypothesized survival, cdf and log-cdf at the ordered records."""
    m = len(k_ord)
    surv = _product_limit(k_ord)
    before = [1.0] + surv[:-1]

    d = 0.0
    for i in range(m):
        d = max(d, before[i] - sf[i], sf[i] - surv[i])

    # segment i runs from r_(i-1) to r_(i); i = m (0-based) is the tail to +inf
    sf_edges = [1.0] + list(sf) + [0.0]
    cdf_edges = [0.0] + list(cdf) + [1.0]
    log_edges = [None] + list(logcdf) + [0.0]
    levels = before + [surv[-1]]
    w2 = 0.0
    ds_log = 0.0
    ds_lin = 0.0
    for i in range(m + 1):
        s = levels[i]
        w2 += (s - sf_edges[i + 1]) ** 3 - (s - sf_edges[i]) ** 3
        a = s - 1.0
        # first segment has a = 0, so its a^2 log F0 term is 0 even though log F0(0) = -inf
        if i > 0 and a != 0.0:
            ds_log += a * a * (log_edges[i + 1] - log_edges[i])
        ds_lin += a * (cdf_edges[i + 1] - cdf_edges[i])
    w2 *= n / 3.0
    ds = n * (ds_log + 2.0 * ds_lin + 0.5)
    return d, w2, ds


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise GofError(f"{name} is not finite ({v!r}): F0 vanishes where the NPMLE is below 1")


def _closed_forms(r_ord, k_ord, alpha, sigma, n):
    """(D, W^2, DS) for ordered records against W(alpha, sigma)."""
    sf, cdf, logcdf = _fitted_terms(r_ord, alpha, sigma)
    d, w2, ds = _sums(k_ord, sf, cdf, logcdf, n)
    _check_finite(W2=w2, DS=ds)
    return d, w2, ds


class ParametricHypothesis:
    """Adapter giving Weibull/exponential parameters the hypothesis interface.

    Any object with ``cdf``, ``sf``, ``logcdf`` and ``quantile`` methods can
    stand in for a fitted model in the statistics below.
    """

    def __init__(self, params):
        self.params = params.as_weibull()

    def cdf(self, x):
        return weibull_cdf(self.params, x)

    def sf(self, x):
        return weibull_sf(self.params, x)

    def logcdf(self, x):
        return weibull_logcdf(self.params, x)

    def quantile(self, u):
        return weibull_quantile(self.params, u)


def _hypothesis(rs, fitted):
    if fitted is None:
        return ParametricHypothesis(fit_weibull(rs).params)
    if all(hasattr(fitted, a) for a in ("cdf", "sf", "logcdf", "quantile")):
        return fitted
    params = getattr(fitted, "params", fitted)
    return ParametricHypothesis(params)


def _setup(rs, fitted, n):
    if rs.scheme != "random":
        raise ValueError("GOF statistics are defined for random-scheme record samples")
    hyp = _hypothesis(rs, fitted)
    view = ordered_view(rs)
    return view, hyp, rs.n if n is None else n


def gof_statistics(rs, fitted=None, n=None):
    """All three statistics at once.

    ``fitted`` may be parameters (``WeibullParams``/``ExponentialParams``), a
    fit object, a hypothesis object with ``cdf``/``sf``/``logcdf``/``quantile``
    methods, or ``None`` to fit the Weibull MLE. ``n`` defaults to the
    sample size of ``rs``.
    """
    stats = GofStatistics(*_unchecked(rs, fitted, n))
    _check_finite(W2=stats.w2_n, DS=stats.ds_n)
    return stats


def _unchecked(rs, fitted, n):
    view, hyp, n = _setup(rs, fitted, n)
    x = np.asarray(view.r_ord)
    if isinstance(hyp, ParametricHypothesis):
        terms = _fitted_terms(view.r_ord, hyp.params.alpha, hyp.params.sigma)
    else:
        with np.errstate(divide="ignore"):
            terms = [np.atleast_1d(f(x)).tolist() for f in (hyp.sf, hyp.cdf, hyp.logcdf)]
    return (*_sums(view.k_ord, *terms, n), n)


def ks_statistic(rs, fitted=None):
    """Kolmogorov-Smirnov type distance between the record NPMLE and F0."""
    return _unchecked(rs, fitted, None)[0]


def cm_statistic(rs, fitted=None, n=None):
    w2 = _unchecked(rs, fitted, n)[1]
    _check_finite(W2=w2)
    return w2


def ds_statistic(rs, fitted=None, n=None):
    """Left-tail weighted distance n int (Fhat - F0)^2 / F0 dF0.

    Raises ``GofError`` when the integral diverges, which happens only if F0
    is zero at a record where the NPMLE has already dropped below 1.
    """
    ds = _unchecked(rs, fitted, n)[2]
    _check_finite(DS=ds)
    return ds


def gof_quadrature_oracle(rs, fitted=None, n=None, kind="cm", tol=1e-9):
    """Integrate the CM or DS definition numerically, segment by segment.

    Works in u = F0(x): each NPMLE segment [r_(i-1), r_(i)) maps to
    [F0(r_(i-1)), F0(r_(i))], and the step function is evaluated at
    F0^{-1}(u) rather than read off the closed-form levels.
    """
    if kind not in ("cm", "ds"):
        raise ValueError(f"kind must be 'cm' or 'ds', got {kind!r}")
    view, hyp, n = _setup(rs, fitted, n)
    step = npmle(rs)
    edges = [0.0] + np.atleast_1d(hyp.cdf(np.asarray(view.r_ord))).tolist() + [1.0]

    def integrand(u):
        diff = step(hyp.quantile(u)) - (1.0 - u)
        return diff * diff / u if kind == "ds" else diff * diff

    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, err = integrate.quad(integrand, lo, hi, epsabs=tol / 10, epsrel=1e-13, limit=200)
        if err > tol:
            raise OracleError(f"quadrature error {err:.3g} exceeds {tol:g} on [{lo!r}, {hi!r}]")
        total += val
    return n * total


def chi2_1_sf(x):
    """Upper tail of chi-square with one degree of freedom."""
    if x <= 0:
        return 1.0
    return math.erfc(math.sqrt(0.5 * x))


def chi2_1_quantile(q):
    z = NormalDist().inv_cdf(0.5 + 0.5 * q)
    return z * z


def glr_lambda_product(rs, alpha_hat):
    """Lambda from the closed product form (for cross-checking the log-space route)."""
    r = np.asarray(rs.r)
    k = np.asarray(rs.k, dtype=float)
    m = rs.m
    ratio = np.sum(k * r**alpha_hat) / np.sum(k * r)
    return ratio**m / (alpha_hat**m * np.prod(r) ** (alpha_hat - 1.0))


def glr_test(rs):
    """Generalized likelihood ratio test of H0: alpha = 1 within the Weibull family."""
    wf = fit_weibull(rs)
    ef = fit_exponential(rs)
    log_lambda = exponential_loglik(rs, ef.sigma) - weibull_loglik(rs, wf.alpha, wf.sigma)
    stat = -2.0 * log_lambda
    return GlrResult(math.exp(log_lambda), stat, chi2_1_sf(stat), ef.sigma, wf)


def decide(value, table, statistic, n, gamma, interpolate=False):
    """Reject when ``value`` strictly exceeds the (1 - gamma) table quantile."""
    critical = table.lookup(statistic, n, 1.0 - gamma, interpolate=interpolate)
    return GofResult(statistic, float(value), float(gamma), critical, bool(value > critical))

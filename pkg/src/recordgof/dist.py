"""Weibull and exponential distribution primitives.

The two-parameter Weibull W(alpha, sigma) has cdf

    F(x) = 1 - exp{-(x / sigma)^alpha},   x >= 0,

and reduces to the exponential Exp(sigma) at alpha = 1. Tail quantities are
computed from the survival form exp{-(x/sigma)^alpha} directly so that small
``x`` does not lose precision to ``1 - cdf`` cancellation.
"""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class WeibullParams:
    """Shape ``alpha`` (unitless) and scale ``sigma`` (data units)."""

    alpha: float
    sigma: float

    def __post_init__(self):
        for name in ("alpha", "sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"Weibull {name} must be finite and > 0, got {value!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sigma", float(self.sigma))

    def as_weibull(self):
        return self


@dataclass(frozen=True)
class ExponentialParams:
    """Exponential model with mean (scale) ``sigma``."""

    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"exponential sigma must be finite and > 0, got {self.sigma!r}")
        object.__setattr__(self, "sigma", float(self.sigma))

    def as_weibull(self):
        return WeibullParams(1.0, self.sigma)


def _params(p):
    try:
        return p.as_weibull()
    except AttributeError:
        raise TypeError(f"unsupported model parameters: {p!r}") from None


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def _check_x(x, strict):
    arr = np.asarray(x, dtype=float)
    bad = ~(arr > 0) if strict else ~(arr >= 0)
    if np.any(bad | np.isnan(arr)):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"x must be {bound}")
    return arr


def cumulative_hazard(p, x):
    """(x / sigma)^alpha."""
    p = _params(p)
    arr = _check_x(x, strict=False)
    return _scalar_or_array(x, (arr / p.sigma) ** p.alpha)


def weibull_cdf(p, x):
    """Weibull cdf; accepts ``ExponentialParams`` as the alpha = 1 case."""
    p = _params(p)
    arr = _check_x(x, strict=False)
    return _scalar_or_array(x, -np.expm1(-((arr / p.sigma) ** p.alpha)))


def weibull_sf(p, x):
    """Survival function exp{-(x/sigma)^alpha}."""
    p = _params(p)
    arr = _check_x(x, strict=False)
    return _scalar_or_array(x, np.exp(-((arr / p.sigma) ** p.alpha)))


def weibull_logcdf(p, x):
    """log F(x), finite for every x > 0 even where F(x) underflows."""
    p = _params(p)
    arr = _check_x(x, strict=True)
    with np.errstate(divide="ignore"):
        log_z = p.alpha * (np.log(arr) - math.log(p.sigma))
    z = np.exp(log_z)
    # log(1 - e^-z) = log z - z/2 + O(z^2) for small z
    small = log_z < -20.0
    with np.errstate(divide="ignore"):
        out = np.where(small, log_z - 0.5 * z, np.log(-np.expm1(-z)))
    return _scalar_or_array(x, out)


def weibull_pdf(p, x):
    """alpha x^(alpha-1) sigma^(-alpha) exp{-(x/sigma)^alpha} for x > 0."""
    p = _params(p)
    arr = _check_x(x, strict=True)
    a, s = p.alpha, p.sigma
    log_z = a * (np.log(arr) - math.log(s))
    out = np.exp(math.log(a) - np.log(arr) + log_z - np.exp(log_z))
    return _scalar_or_array(x, out)


def weibull_quantile(p, u):
    """Inverse cdf sigma * (-log(1 - u))^(1/alpha) for u in (0, 1)."""
    p = _params(p)
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise ValueError("u must lie strictly inside (0, 1)")
    return _scalar_or_array(u, p.sigma * (-np.log1p(-arr)) ** (1.0 / p.alpha))


def _open_uniforms(rng, size):
    u = rng.random(size)
    # Generator.random is on [0, 1); a zero would map to x = 0
    while np.any(u == 0.0):
        zero = u == 0.0
        u[zero] = rng.random(int(zero.sum()))
    return u


def sample(p, rng):
    """One inverse-transform draw from the model using a single uniform."""
    return float(sample_n(p, 1, rng)[0])


def sample_n(p, size, rng):
    """``size`` i.i.d. inverse-transform draws, one uniform per draw."""
    p = _params(p)
    u = _open_uniforms(rng, size)
    return p.sigma * (-np.log1p(-u)) ** (1.0 / p.alpha)

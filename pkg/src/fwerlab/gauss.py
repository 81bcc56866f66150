"""Standard normal pdf, cdf, survival function and quantiles.

Every function accepts scalars or array-likes and returns a float for
scalar input. Upper-tail quantities are computed from the complementary
error function directly, never as ``1 - cdf``, so relative accuracy holds
deep into the tail (down to the smallest normal double near x = 37.5).
"""

import numpy as np
from scipy import special

from .errors import DomainError

_INV_SQRT_2PI = 0.3989422804014327
# 1/sqrt(2) split into a double and its rounding residual.
_SQRT1_2_HI = 0.7071067811865476
_SQRT1_2_LO = -4.833646656726457e-17
_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant

# Below this, log(Phi(x)) comes from scipy's asymptotic log_ndtr because
# the tail itself is subnormal.
_LOG_TAIL_SWITCH = -37.0


def _scalar_or_array(out, like):
    if np.ndim(like) == 0:
        return float(out)
    return out


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _scaled_arg(x):
    """Return (y, dy) with y + dy = x/sqrt(2) to about twice working precision."""
    y = x * _SQRT1_2_HI
    xh, xl = _split(x)
    ch, cl = _split(_SQRT1_2_HI)
    # exact rounding error of the product x * _SQRT1_2_HI (Dekker)
    err = ((xh * ch - y) + xh * cl + xl * ch) + xl * cl
    return y, err + x * _SQRT1_2_LO


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(_INV_SQRT_2PI * np.exp(-0.5 * x * x), x)


def std_normal_sf(x):
    """Upper tail 1 - Phi(x) with full relative accuracy for large x."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        y, dy = _scaled_arg(x)
        # erfc(y + dy) = erfc(y) * exp(-2 y dy) to first order; only the
        # upper tail needs it, below zero erfc is near 2 and insensitive
        out = 0.5 * special.erfc(y) * np.exp(-2.0 * np.maximum(y, 0.0) * dy)
    # erfc flushes subnormal results to zero; recover them through the log tail
    deep = (out == 0.0) & np.isfinite(x)
    if np.any(deep):
        out = np.where(deep, np.exp(special.log_ndtr(-np.where(deep, x, 0.0))), out)
    out = np.where(np.isfinite(x), out, np.where(x > 0, 0.0, 1.0))
    return _scalar_or_array(out, x)


def std_normal_cdf(x):
    """Phi(x), evaluated as the upper tail at -x."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(np.asarray(std_normal_sf(-x)), x)


def _lower_quantile(p):
    # p in (0, 0.5]; scipy's rational approximation, then Newton steps
    # using the tail-accurate cdf.
    x = special.ndtri(p)
    for _ in range(2):
        dens = np.asarray(std_normal_pdf(x))
        step = (np.asarray(std_normal_sf(-x)) - p) / dens
        x = np.where(dens > 0, x - step, x)
    return x


def _check_open_unit(p, name):
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError(f"{name} must lie strictly inside (0, 1)")


def std_normal_quantile_complementary(eps):
    """Return x with 1 - Phi(x) = eps, without ever forming 1 - eps."""
    eps = np.asarray(eps, dtype=float)
    _check_open_unit(eps, "eps")
    lower = np.minimum(eps, 0.5)
    out = -_lower_quantile(lower)
    upper = eps > 0.5
    if np.any(upper):
        # eps > 1/2: 1 - eps is exact (Sterbenz), so the lower branch applies.
        out = np.where(upper, _lower_quantile(np.where(upper, 1.0 - eps, 0.5)), out)
    return _scalar_or_array(out, eps)


def std_normal_quantile(p):
    """Inverse of Phi on (0, 1); the upper half goes through the tail path."""
    p = np.asarray(p, dtype=float)
    _check_open_unit(p, "p")
    out = _lower_quantile(np.minimum(p, 0.5))
    upper = p > 0.5
    if np.any(upper):
        q = np.where(upper, 1.0 - p, 0.5)
        out = np.where(upper, -_lower_quantile(q), out)
    return _scalar_or_array(out, p)


def log_cdf(x):
    """Natural log of Phi(x), accurate in both tails."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = np.log1p(-np.asarray(std_normal_sf(np.maximum(x, 0.0))))
        lower = np.log(np.asarray(std_normal_sf(-np.minimum(x, 0.0))))
        deep = special.log_ndtr(np.minimum(x, _LOG_TAIL_SWITCH))
    out = np.where(x >= 0, upper, np.where(x > _LOG_TAIL_SWITCH, lower, deep))
    return _scalar_or_array(out, x)


def log_cdf_pow(x, n):
    """n * log(Phi(x)), i.e. the log of Phi(x)**n without underflow.

    ``n`` may be as large as 1e8 or more; the result is exact to the
    accuracy of :func:`log_cdf`.
    """
    x = np.asarray(x, dtype=float)
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise DomainError("n must be at least 1")
    out = n * np.asarray(log_cdf(x))
    if np.ndim(x) == 0 and np.ndim(n) == 0:
        return float(out)
    return out


def cdf_pow(x, n):
    """Phi(x)**n via log space."""
    return np.exp(log_cdf_pow(x, n))


def gordon_bounds(x):
    """Gordon's lower and upper bracket for the normal tail, x > 0.

    Returns ``(x*pdf/(1+x^2), pdf/x)``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("Gordon bounds need x > 0")
    dens = np.asarray(std_normal_pdf(x))
    lo = x * dens / (1.0 + x * x)
    hi = dens / x
    if np.ndim(x) == 0:
        return float(lo), float(hi)
    return lo, hi


def mills_ratio_product(x):
    """x * sf(x) / pdf(x); tends to 1 as x grows."""
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(x * np.asarray(std_normal_sf(x)) / np.asarray(std_normal_pdf(x)), x)


__all__ = [
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_quantile",
    "std_normal_quantile_complementary",
    "log_cdf",
    "log_cdf_pow",
    "cdf_pow",
    "gordon_bounds",
    "mills_ratio_product",
]

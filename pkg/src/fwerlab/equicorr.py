"""Deterministic Bonferroni FWER under the equicorrelated Gaussian model.

With X_i = sqrt(rho)*Z + sqrt(1-rho)*W_i, the probability that no
statistic crosses the cutoff c is

    H_n(rho) = E[ Phi((c + sqrt(rho) Z) / sqrt(1-rho))**n ],   Z ~ N(0, 1),

and FWER = 1 - H_n(rho). The quadrature here integrates the FWER
integrand phi(z) * (1 - Phi(u(z))**n) directly instead of forming
1 - H, so small FWER values keep their relative accuracy.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import quadrature
from .cutoffs import EquicorrProblem, bonferroni_cutoff
from .errors import ConvergenceError, DomainError
from .gauss import (
    log_cdf_pow,
    std_normal_pdf,
    std_normal_quantile_complementary,
    std_normal_sf,
)


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    ASYMPTOTIC_APPROX = "asymptotic_approx"


# Error estimate attached to values whose accuracy is not quantified.
UNQUANTIFIED = math.inf


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    truncation: float = 12.0
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.truncation < 8:
            raise DomainError("truncation must be at least 8")
        if self.max_subdivisions < 10:
            raise DomainError("max_subdivisions must be at least 10")


@dataclass(frozen=True)
class FwerValue:
    value: float
    method: Method
    error_estimate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"FWER value {self.value!r} outside [0, 1]")
        if not self.error_estimate >= 0.0:
            raise DomainError("error estimate must be nonnegative")
        if self.method is Method.CLOSED_FORM and self.error_estimate != 0.0:
            raise DomainError("closed forms carry no error estimate")

    @property
    def quantified(self):
        return math.isfinite(self.error_estimate)


def fwer_independent(n, alpha):
    """1 - (1 - alpha/n)**n, the rho = 0 closed form."""
    EquicorrProblem(n, alpha, 0.0)
    if n == 1:
        return FwerValue(alpha, Method.CLOSED_FORM)
    return FwerValue(-math.expm1(n * math.log1p(-alpha / n)), Method.CLOSED_FORM)


def fwer_perfectly_correlated(n, alpha):
    """alpha/n: at rho = 1 all statistics coincide."""
    EquicorrProblem(n, alpha, 1.0)
    return FwerValue(alpha / n, Method.CLOSED_FORM)


def transition_point(problem):
    """z at which Phi(u(z))**n sits in its sharp transition (n * sf(u) = 1).

    None when n = 1 (no transition) or when rho = 0.
    """
    if problem.n < 2 or problem.rho <= 0.0:
        return None
    c = bonferroni_cutoff(problem).value
    u_star = std_normal_quantile_complementary(1.0 / problem.n)
    return (math.sqrt(1.0 - problem.rho) * u_star - c) / math.sqrt(problem.rho)


def _fwer_integrand(problem, c):
    n = problem.n
    a = math.sqrt(problem.rho)
    b = math.sqrt(1.0 - problem.rho)

    def f(z):
        u = (c + a * z) / b
        return std_normal_pdf(z) * -np.expm1(log_cdf_pow(u, n))

    return f


def fwer_quadrature(problem, spec=QuadratureSpec()):
    """FWER(n, alpha, rho) for 0 < rho < 1 by adaptive quadrature over z.

    The error estimate adds the mass 2*sf(T) dropped by truncating z to
    [-T, T]. Raises ``ConvergenceError`` if tolerance is not met within
    ``spec.max_subdivisions`` panels.
    """
    if not 0.0 < problem.rho < 1.0:
        raise DomainError("quadrature needs 0 < rho < 1; use the closed forms at the endpoints")
    c = bonferroni_cutoff(problem).value
    t = spec.truncation
    seeds = [0.0]
    z_star = transition_point(problem)
    if z_star is not None and -t < z_star < t:
        # width of the transition in z is about sqrt(1-rho) / (sqrt(rho) * u*)
        width = math.sqrt(1.0 - problem.rho) / (math.sqrt(problem.rho) * max(c, 1.0))
        seeds += [z_star - 4 * width, z_star, z_star + 4 * width]
    tail = 2.0 * std_normal_sf(t)
    try:
        res = quadrature.integrate(
            _fwer_integrand(problem, c), -t, t, breakpoints=seeds,
            rel_tol=spec.rel_tol, abs_tol=spec.abs_tol,
            max_subdivisions=spec.max_subdivisions)
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"FWER quadrature failed for {problem}: {exc}",
            min(max(exc.estimate, 0.0), 1.0), exc.error + tail) from exc
    value = min(max(res.value, 0.0), 1.0)
    return FwerValue(value, Method.QUADRATURE, res.error + tail)


def fwer_asymptotic_approx(problem):
    """1 - exp(-alpha * n**(-rho/(1-rho))), a large-n approximation.

    No error rate is known for it, so the error estimate is
    ``UNQUANTIFIED`` (infinity). Never used inside other computations.
    """
    if problem.rho >= 1.0:
        raise DomainError("approximation undefined at rho = 1")
    exponent = -problem.rho / (1.0 - problem.rho) * math.log(problem.n)
    value = -math.expm1(-problem.alpha * math.exp(exponent))
    return FwerValue(value, Method.ASYMPTOTIC_APPROX, UNQUANTIFIED)


def fwer_equicorr(problem, spec=QuadratureSpec()):
    """Dispatch on rho: closed form at exactly 0 or 1, quadrature in between."""
    if problem.rho == 0.0:
        return fwer_independent(problem.n, problem.alpha)
    if problem.rho == 1.0:
        return fwer_perfectly_correlated(problem.n, problem.alpha)
    return fwer_quadrature(problem, spec)


def limit_diagnostic_lemma2(alpha, rho, ns):
    """[(n, Phi(c_{alpha,n}/sqrt(1-rho))**n)] for n in ns; tends to 1 for 0 < rho < 1."""
    if not 0.0 < rho < 1.0:
        raise DomainError("rho must lie in (0, 1)")
    rows = []
    for n in ns:
        c = bonferroni_cutoff(EquicorrProblem(n, alpha, rho)).value
        rows.append((n, math.exp(log_cdf_pow(c / math.sqrt(1.0 - rho), n))))
    return rows


@dataclass(frozen=True)
class ProbePoint:
    rho: float
    fwer: FwerValue
    within_bound: bool
    # None at the grid ends, where no second difference exists
    convex: bool | None


def convexity_probe(alpha, n, rhos, spec=QuadratureSpec(), bound_tol=1e-3, convexity_tol=1e-9):
    """FWER curve over a sorted rho grid at fixed n.

    Each point is flagged against the bound alpha*(1 - rho) + bound_tol and,
    for interior points of grids with at least 3 entries, whether the
    divided second difference is >= -convexity_tol.
    """
    rhos = [float(r) for r in rhos]
    if any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise DomainError("rhos must be strictly increasing")
    values = [fwer_equicorr(EquicorrProblem(n, alpha, r), spec) for r in rhos]
    points = []
    for i, (r, fv) in enumerate(zip(rhos, values)):
        convex = None
        if 0 < i < len(rhos) - 1:
            r0, r2 = rhos[i - 1], rhos[i + 1]
            f0, f1, f2 = values[i - 1].value, fv.value, values[i + 1].value
            second = 2 * ((f2 - f1) / (r2 - r) - (f1 - f0) / (r - r0)) / (r2 - r0)
            convex = second >= -convexity_tol
        points.append(ProbePoint(r, fv, fv.value <= alpha * (1 - r) + bound_tol, convex))
    return points

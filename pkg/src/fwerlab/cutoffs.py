"""Bonferroni and k-FWER rejection cutoffs.

All cutoffs go through the complementary quantile: ``1 - alpha/n`` is
never formed, since it stops being representable long before n gets
interesting.
"""

import math
from dataclasses import dataclass

from scipy import optimize

from .errors import DomainError
from .gauss import std_normal_quantile_complementary


@dataclass(frozen=True)
class EquicorrProblem:
    """One equicorrelated testing problem: n tests at level alpha, common correlation rho."""

    n: int
    alpha: float
    rho: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho!r}")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class Cutoff:
    value: float
    per_test_level: float


def bonferroni_cutoff(problem):
    """c = Phi^{-1}(1 - alpha/n)."""
    level = problem.alpha / problem.n
    return Cutoff(std_normal_quantile_complementary(level), level)


def kfwer_cutoff(problem, k):
    """Lehmann-Romano cutoff Phi^{-1}(1 - k*alpha/n) for controlling k-FWER.

    Requires k >= 1 and k*alpha < 1. For k = 1 this is the Bonferroni
    cutoff.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if k * problem.alpha >= 1.0:
        raise DomainError(f"k*alpha must be < 1 (k={k}, alpha={problem.alpha})")
    if k == 1:
        return bonferroni_cutoff(problem)
    level = k * problem.alpha / problem.n
    return Cutoff(std_normal_quantile_complementary(level), level)


def sqrt_2logn_bound(n):
    if n < 2:
        raise DomainError(f"sqrt(2 ln n) needs n >= 2, got {n!r}")
    return math.sqrt(2.0 * math.log(n))


def cutoff_ratio_diagnostic(alpha, ns):
    """List of (n, c_{alpha,n} / sqrt(2 ln n)) for convergence reporting."""
    rows = []
    for n in ns:
        c = bonferroni_cutoff(EquicorrProblem(n, alpha, 0.0)).value
        rows.append((n, c / sqrt_2logn_bound(n)))
    return rows


def _cutoff_gap(log_n, alpha):
    # c_{alpha,n} - sqrt(2 ln n) as a function of ln n; n may exceed any int.
    c = std_normal_quantile_complementary(alpha * math.exp(-log_n))
    return c - math.sqrt(2.0 * log_n)


def lemma1_threshold(alpha, max_log_n=700.0):
    """Smallest real n beyond which c_{alpha,n} <= sqrt(2 ln n) holds for good.

    Returned as ``(n, log_n)``; ``n`` is ``inf`` when it overflows a
    double. The gap c - sqrt(2 ln n) has a single sign change on
    [ln 2, max_log_n] for alpha in (0, 1) (it behaves like
    ``(2 ln(1/alpha) - ln(4 pi ln n)) / (2 sqrt(2 ln n))``), so a grid scan
    followed by a bracketed root suffices. Raises ``DomainError`` when no
    crossing exists below ``max_log_n``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    lo = math.log(2.0)
    if _cutoff_gap(lo, alpha) <= 0:
        return 2.0, lo
    grid = [lo + i * (max_log_n - lo) / 4000 for i in range(4001)]
    prev = lo
    for t in grid[1:]:
        if _cutoff_gap(t, alpha) <= 0:
            root = optimize.brentq(_cutoff_gap, prev, t, args=(alpha,), xtol=1e-12)
            try:
                return math.exp(root), root
            except OverflowError:
                return math.inf, root
        prev = t
    raise DomainError(f"no crossing below ln n = {max_log_n} for alpha={alpha}")


def lemma1_onset(alpha, ns):
    """Smallest n in the sorted grid from which the sqrt(2 ln n) bound holds onward.

    Returns None when it fails at the last grid point.
    """
    onset = None
    for n, ratio in cutoff_ratio_diagnostic(alpha, ns):
        if ratio <= 1.0:
            if onset is None:
                onset = n
        else:
            onset = None
    return onset

"""
Arbitrary correlation and Slepian's bound
=========================================

With every correlation at least delta > 0, FWER is at most the
equicorrelated value at rho = delta.
"""

import numpy as np

from fwerlab.general import (
    estimate_fwer_general,
    quadrant_probability_mc,
    random_correlation_matrix,
    slepian_upper_bound,
    validate_correlation,
)
from fwerlab.montecarlo import McConfig

rng = np.random.default_rng(3)
alpha = 0.05

for n, delta in [(10, 0.2), (50, 0.4), (200, 0.1)]:
    sigma = validate_correlation(random_correlation_matrix(n, delta, rng))
    est = estimate_fwer_general(sigma, alpha, McConfig(replications=100_000, seed=n))
    bound = slepian_upper_bound(sigma, alpha).value
    print(f"n={n:<4} min corr={sigma.min_off_diag:.3f}  mc={est.estimate:.5f} ({est.std_error:.1e})"
          f"  bound={bound:.5f}")

# raising correlations raises the quadrant probability
t = random_correlation_matrix(5, 0.0, rng)
a = np.full(5, 0.5)
for lam in [0.0, 0.3, 0.6, 0.9]:
    r = validate_correlation((1 - lam) * t + lam * np.ones((5, 5)))
    g = quadrant_probability_mc(r, a, McConfig(replications=200_000, seed=7))
    print(f"lambda={lam}: P(all X_i <= 0.5) = {g.estimate:.4f}")

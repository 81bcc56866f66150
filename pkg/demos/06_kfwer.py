"""
Tolerating k false rejections
=============================

Rejecting at Phi^{-1}(1 - k alpha / n) controls the chance of k or more
false rejections, and that chance never exceeds FWER at level k alpha.
"""

import numpy as np

from fwerlab.cutoffs import EquicorrProblem
from fwerlab.equicorr import fwer_equicorr
from fwerlab.general import estimate_kfwer_general, random_correlation_matrix, validate_correlation
from fwerlab.montecarlo import McConfig, estimate_kfwer

alpha, rho, n = 0.01, 0.3, 10**4
for k in [1, 2, 3, 5]:
    kf = estimate_kfwer(EquicorrProblem(n, alpha, rho), k, McConfig(seed=k))
    cap = fwer_equicorr(EquicorrProblem(n, k * alpha, rho)).value
    print(f"k={k}  k-FWER={kf.estimate:.6f} ({kf.std_error:.1e})  FWER at k*alpha={cap:.6f}")

# k-th largest order statistic makes n = 1e8 cheap
kf = estimate_kfwer(EquicorrProblem(10**8, alpha, rho), 3, McConfig(seed=0))
print("n=1e8, k=3:", kf.estimate)

sigma = validate_correlation(random_correlation_matrix(40, 0.2, np.random.default_rng(0)))
print("general 40x40, k=2:",
      estimate_kfwer_general(sigma, 0.02, 2, McConfig(replications=100_000)).estimate)

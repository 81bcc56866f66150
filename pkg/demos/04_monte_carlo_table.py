"""
Monte Carlo over a grid of (rho, n)
===================================

Each replication needs one shared factor and the max of n normals. The
max has CDF Phi**n, so one uniform suffices even at n = 1e8.

The second half shows what happens if one realized max is reused for
every replication: the estimate becomes a probability conditional on
that max, and it can land far from FWER.
"""

import time

from fwerlab.cutoffs import EquicorrProblem
from fwerlab.equicorr import fwer_equicorr
from fwerlab.montecarlo import (
    McConfig,
    estimate_fwer,
    estimate_fwer_shared_max,
    fwer_given_max,
    table_one_run,
)

alpha = 0.05
ns = [10**4, 10**6, 10**8]
rhos = [0.1, 0.5, 0.9]

t0 = time.perf_counter()
grid = table_one_run(alpha, ns, rhos, McConfig(seed=1))
print(f"{len(grid)} cells of 1e6 replications in {time.perf_counter() - t0:.1f} s")
for rho in rhos:
    for n in ns:
        est = grid[rho, n]
        exact = fwer_equicorr(EquicorrProblem(n, alpha, rho)).value
        z = (est.estimate - exact) / est.std_error
        print(f"rho={rho} n={n:.0e}  mc={est.estimate:.6f} ({est.std_error:.1e})  exact={exact:.6f}  z={z:+.2f}")

# one max for everybody
p = EquicorrProblem(10**4, alpha, 0.3)
for seed in range(4):
    shared, w = estimate_fwer_shared_max(p, McConfig(seed=seed))
    print(f"shared max w={w:.3f}: estimate {shared.estimate:.6f}, "
          f"conditional truth {fwer_given_max(p, w):.6f}")
fresh = estimate_fwer(p, McConfig(seed=99))
print(f"independent maxes: {fresh.estimate:.6f}, exact {fwer_equicorr(p).value:.6f}")

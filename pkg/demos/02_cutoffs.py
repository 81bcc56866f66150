"""
How the Bonferroni cutoff grows
===============================

c = Phi^{-1}(1 - alpha/n) behaves like sqrt(2 ln n), but from above for
any n you are likely to meet.
"""

from fwerlab.cutoffs import (
    EquicorrProblem,
    bonferroni_cutoff,
    cutoff_ratio_diagnostic,
    kfwer_cutoff,
    lemma1_threshold,
    sqrt_2logn_bound,
)

alpha = 0.05
ns = [10**e for e in range(2, 17, 2)]
for n, ratio in cutoff_ratio_diagnostic(alpha, ns):
    c = bonferroni_cutoff(EquicorrProblem(n, alpha, 0.0)).value
    print(f"n=1e{len(str(n)) - 1:<2}  c={c:.4f}  sqrt(2 ln n)={sqrt_2logn_bound(n):.4f}  ratio={ratio:.5f}")

# where the cutoff finally drops below sqrt(2 ln n)
n_star, log_n = lemma1_threshold(alpha)
print(f"crossing at n ~ {n_star:.3e} (ln n = {log_n:.3f})")

# k-FWER relaxes the cutoff to Phi^{-1}(1 - k alpha / n)
prob = EquicorrProblem(10**4, 0.01, 0.3)
for k in [1, 2, 3, 10]:
    print(f"k={k:<2} cutoff={kfwer_cutoff(prob, k).value:.4f}")

"""
FWER under equicorrelation
==========================

Exact FWER(n, alpha, rho) by quadrature over the shared factor, next to
the closed forms, the large-n approximation and the alpha(1 - rho) line.
"""

from fwerlab.cutoffs import EquicorrProblem
from fwerlab.equicorr import (
    convexity_probe,
    fwer_asymptotic_approx,
    fwer_equicorr,
    limit_diagnostic_lemma2,
)

alpha = 0.05
ns = [10**e for e in range(3, 9)]
rhos = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0]

print("rho  " + "".join(f"{'n=1e%d' % (len(str(n)) - 1):>11}" for n in ns))
for rho in rhos:
    vals = [fwer_equicorr(EquicorrProblem(n, alpha, rho)).value for n in ns]
    print(f"{rho:<4} " + "".join(f"{v:11.6f}" for v in vals))

# the approximation is off by orders of magnitude at mid rho
p = EquicorrProblem(10**6, alpha, 0.5)
print("exact", fwer_equicorr(p).value, " approx", fwer_asymptotic_approx(p).value)

# Phi(c / sqrt(1 - rho))**n -> 1 drives the decay
print(limit_diagnostic_lemma2(alpha, 0.5, [10**3, 10**5, 10**7]))

for pt in convexity_probe(alpha, 10**6, [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0]):
    print(f"rho={pt.rho:.1f} fwer={pt.fwer.value:.6f} "
          f"<= alpha(1-rho)+1e-3: {pt.within_bound}  convex: {pt.convex}")

"""
Normal tails far out
====================

The tail probability, its inverse and the Gordon bracket, checked out
to the edge of double precision.
"""

import numpy as np

from fwerlab.gauss import (
    gordon_bounds,
    log_cdf_pow,
    mills_ratio_product,
    std_normal_quantile_complementary,
    std_normal_sf,
)

# tail values stay relative-accurate until they go subnormal near x = 37.5
for x in [1.0, 5.0, 10.0, 20.0, 37.0]:
    lo, hi = gordon_bounds(x)
    print(f"x={x:5.1f}  sf={std_normal_sf(x):.15e}  bracket=({lo:.3e}, {hi:.3e})")

# x * sf(x) / pdf(x) creeps up to 1, but slowly: the gap is about 1/x^2
x = np.array([2.0, 8.0, 32.0])
print("Mills ratio product:", mills_ratio_product(x))

# the inverse works from the tail probability, so tiny levels keep their digits
for eps in [5e-6, 5e-10, 1e-300]:
    c = std_normal_quantile_complementary(eps)
    print(f"eps={eps:.0e}  cutoff={c:.12f}  round trip={std_normal_sf(c) / eps - 1:+.1e}")

# Phi(x)**n in log space: fine even at n = 1e8
print("log Phi(6.1)^1e8 =", log_cdf_pow(6.1, 10**8))

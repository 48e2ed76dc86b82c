"""
Square functions and norm probes
================================

Split a trigonometric polynomial into the pieces living on each gap of a
set and compare L^p norms of the square function with the original.
"""

# %%
import math

import numpy as np

from lp_lab import (
    TrigPolynomial,
    cantor_triadic,
    chain_ratio,
    dirichlet_norm,
    dirichlet_scaling,
    dyadic_set,
    frame_probe,
    khintchine_ratio,
    lemma4_growth,
    lp_norm,
    rademacher_experiment,
)

# %%
# ||1 + e^{ix}||_1 = 4/pi.
f = TrigPolynomial([0, 1], [1, 1])
print(lp_norm(f, 1), 4 / math.pi)

# The Dirichlet kernel grows like N^(1/q).
for p in (4 / 3, 2, 4):
    print(p, round(dirichlet_scaling(p, [2**k for k in range(4, 13)]).exponent, 5))
print(dirichlet_norm(16, 4) ** 4, (2 * 16**3 + 16) / 3)

# %%
# Empirical frame range of the square function. At p = 2 both ends are 1.
for p in (4 / 3, 2, 4):
    c1, c2, _ = frame_probe(dyadic_set(0, 10), p, 100, 8192, seed=0)
    print(f"dyadic p={p:.3f}: [{c1:.3f}, {c2:.3f}]")
c1, c2, _ = frame_probe(cantor_triadic(4), 4 / 3, 100, 1024, seed=0, freq_scale=81.0)
print(f"cantor p=1.333: [{c1:.3f}, {c2:.3f}]")

# %%
# Random signs: Khintchine ratios and the lacunary experiment.
print(khintchine_ratio(np.ones(10), 1))
rep = rademacher_experiment([2**k for k in range(8)], 256, 4 / 3, trials=500, seed=1)
print({k: round(v, 4) for k, v in rep.scalars.items() if isinstance(v, float)})

# %%
# The chain ratio exceeds 1 for p < 2, so R_n = r_p^n has no uniform bound.
r, R, check = chain_ratio(2, 1.0)
print(r, math.pi / (2 * math.sqrt(2)), check)
print([round(row["R_n"], 3) for row in lemma4_growth(range(1, 21), 4 / 3).table])

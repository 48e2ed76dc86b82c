"""
Thin sets and how thick they look
=================================

Build a few closed sets from their gaps and measure them at shrinking
scales: neighbourhood measure, box counting and porosity.
"""

# %%
import math

import numpy as np

from lp_lab import GapSequence, PsiSpec, cantor_triadic, dyadic_set, generated_set, theorem3_set
from lp_lab.thickness import (
    box_counting,
    gap_lower_bound,
    neighborhood_measure,
    porosity_estimate,
    reliable_floor,
    theorem2_fit,
)

# %%
# The middle-thirds Cantor set, truncated. Every component has length
# 3**-depth, and that length is the smallest scale we trust.
C = cantor_triadic(10)
print(len(C.components()), "components, residual", C.residual)

fit = box_counting(C, [3.0**-k for k in range(1, 9)])
print("box slope", round(fit.slope, 5), "vs", round(math.log(2) / math.log(3), 5))

# %%
# Lacunary points {+-2^k} near the origin: the neighbourhood measure
# behaves like delta * log(1/delta), a bit thicker than a finite set.
D = dyadic_set(-12, 0)
for j in range(4, 11):
    d = 2.0**-j
    print(f"delta=2^-{j:<2d} |E_delta|={neighborhood_measure(D, d):.5f}")

t2 = theorem2_fit(D, (0, 1), [2.0**-j for j in range(4, 11)])
print("fitted exponent on [0,1]:", round(t2.exponent, 4))

# %%
# A perfect set generated by gaps 2^-k. Gaps wider than 2*delta each add
# at least 2*delta to the neighbourhood, which gives a lower bound.
seq = GapSequence.geometric(math.log(2))
G = generated_set(seq, 12)
rows = [(2.0**-j, neighborhood_measure(G, 2.0**-j), gap_lower_bound(seq, 2.0**-j)) for j in range(4, 11)]
for d, m, lb in rows:
    print(f"{d:.5f}  measure {m:.5f}  bound {lb:.5f}  ratio/(d log2 1/d) {m / (d * math.log2(1 / d)):.3f}")

print(porosity_estimate(cantor_triadic(6)).to_dict())

# %%
# A countable set that carries chains of every order up to K while its
# neighbourhoods stay below psi(delta) = delta * log(1/delta)**2.
psi = PsiSpec("powerlog", 2.0)
res = theorem3_set(psi, 4)
floor = reliable_floor(res.gapset)
deltas = [d for d in np.logspace(-3, -15, 7) if d >= floor]
for d in deltas:
    print(f"{d:.1e}  measure/psi = {neighborhood_measure(res.gapset, d) / psi(d):.4f}")
print("exponents n_k:", res.exponents)

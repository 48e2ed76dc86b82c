"""
Splitting progressions and finding chains
=========================================

How many gaps does an arithmetic progression visit, and when can a
chain be nudged so that each point lands in its own gap?
"""

# %%
import math

from lp_lab import APSpec, Chain, cantor_triadic, chain_split_shift, dyadic_set, find_chain, lemma2_shift, lemma5_sequence
from lp_lab.combinatorics import max_splitting_subset, splits

# %%
# Against the lacunary set a progression of length N only meets about
# log2 N gaps.
E = dyadic_set(0, 12)
for m in range(4, 13):
    nu, _, _ = max_splitting_subset(E, APSpec(0, 1, 2**m))
    print(f"N=2^{m:<2d} nu={nu:<3d} nu/log2N={nu / m:.3f}")

# %%
print(splits([0.5], cantor_triadic(1)).to_dict())
print(splits([0.4, 0.5], cantor_triadic(1)).reason)

# A point sitting on the set moves off it with a small shift.
print("shift:", lemma2_shift([1 / 3], cantor_triadic(1), 0.1))

# %%
# Chains: 2**n points a + sum eps_j l_j, all distinct.
print(find_chain([0, 1, 2, 3, 7, 9], 2))
print(find_chain([0, 1, 2], 2))

xi, cert = chain_split_shift(Chain(0.2, (0.6,)), cantor_triadic(2), 0.1)
print("chain split shift", xi, "gaps", cert.gap_index)

# %%
# Disjoint chains of increasing order from one decreasing length sequence.
pts, chains, intervals = lemma5_sequence([3.0**-k for k in range(1, 30)], 4)
for ch, (a, b) in zip(chains, intervals):
    print(f"order {ch.order}: {len(ch.points())} points in [{a:.6g}, {b:.6g}]")

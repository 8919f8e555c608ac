"""
A synthetic population and its social graph
===========================================

Generate the 675-agent population from the calibrated type profiles, check
its initial modal split per mobility type, and build the homophily graph.
"""

import numpy as np

from coherence_diffusion import ACTION_LABELS, build_graph, generate_population, tally_shares
from coherence_diffusion.profiles import CALIBRATION_SEED, TARGET_SHARES, calibrated_profiles

pop = generate_population(675, calibrated_profiles(), CALIBRATION_SEED)
print(f"{len(pop)} agents")

# initial preferences per type next to the targets the profiles were fitted to
print("\n" + " " * 8 + "".join(f"{a[:8]:>10s}" for a in ACTION_LABELS))
for t, tally in tally_shares(pop, by_type=True).items():
    print(f"type {t} " + "".join(f"{100 * s:9.1f}%" for s in tally.shares)
          + f"   (n={tally.count})")
    print("  target" + "".join(f"{100 * s:9.1f}%" for s in TARGET_SHARES[t]))

# ties need geographic reach and form more often between similar agents
g = build_graph(pop, seed=1)
deg = g.degree()
print(f"\n{g.n_edges} ties, mean degree {deg.mean():.1f}, "
      f"{np.sum(deg == 0)} isolated agents")

# similar pairs are tied more often than dissimilar ones
from coherence_diffusion.socialnet import candidate_mask, tie_weights
cand = candidate_mask(pop)
w = tie_weights(pop, cand)
ii, jj = np.nonzero(cand)
edges = g.edge_set()
tied = np.array([(i, j) in edges for i, j in zip(ii.tolist(), jj.tolist())])
for lo, hi in ((0, 0.4), (0.4, 0.6), (0.6, 1.01)):
    m = (w[ii, jj] >= lo) & (w[ii, jj] < hi)
    print(f"tie weight in [{lo:.1f}, {min(hi, 1):.1f}): {tied[m].mean():.2f} tied "
          f"({m.sum()} candidate pairs)")

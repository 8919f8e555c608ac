"""
One agent's decision network
============================

Build a small mind by hand, let it settle, then see how a persuasive
conversation and a media push move its preferred transport mode.
"""

import numpy as np

from coherence_diffusion import ACTION_LABELS, NEED_LABELS, build_network
from coherence_diffusion.influence import apply_means_ends, lookup_pi, InfluenceTables

G, A = len(NEED_LABELS), len(ACTION_LABELS)
need = {name: i for i, name in enumerate(NEED_LABELS)}
act = {name: i for i, name in enumerate(ACTION_LABELS)}

# a commuter who values independence and cost, and thinks the car serves both
fac = np.zeros((G, A))
fac[need["independence"], act["ICE car"]] = 0.10
fac[need["independence"], act["EV"]] = 0.06
fac[need["cost efficiency"], act["public transport"]] = 0.08
fac[need["cost efficiency"], act["EV"]] = 0.04
pri = np.zeros(G)
pri[need["independence"]] = 0.3
pri[need["cost efficiency"]] = 0.2
nval = np.zeros(G)
aval = np.zeros(A)

mind = build_network(fac, pri, nval, aval)
report = mind.settle()
choice = mind.decide()
print(f"settled in {report.iterations} iterations (converged={report.converged})")
for label, a in zip(ACTION_LABELS, choice.action_activations):
    print(f"  {label:17s} {a:+.3f}")
print("prefers:", ACTION_LABELS[choice.chosen_action])

# a friend who is sure EVs are cheap to run (w = 0.8) talks to our commuter
tables = InfluenceTables()
w = mind.facilitation[need["cost efficiency"], act["EV"]]
pi = lookup_pi(tables, 0.8, w)
print(f"\nfriend's fact: cost efficiency -> EV, pi = {pi:+.1f}%")
for _ in range(10):  # repeated conversations with the same message
    w = apply_means_ends(w, lookup_pi(tables, 0.8, w))
print(f"belief after 10 conversations: {w:.3f}")

# a media campaign pushes the same link, scaled by the agent's policy impact
mu, delta = 0.7, 0.1
for _ in range(5):
    w = min(1.0, w + mu * delta)
mind.facilitation[need["cost efficiency"], act["EV"]] = w
mind.reset()
mind.settle()
after = mind.decide(previous=choice.chosen_action)
print(f"after persuasion and campaign: prefers {ACTION_LABELS[after.chosen_action]}")

"""Optimal unambiguous discrimination of the three COW signals.

Walks through the three measurement regimes at a fixed decoy fraction and
checks one optimum against a brute-force search over feasible measurements.
"""

import numpy as np

from cowzero.usd import ProtocolParams, optimal_usd, usd_feasible

F = 0.5

print(f"decoy fraction f = {F}")
print(f"{'mu':>6} {'regime':>6} {'q_ss':>9} {'q_ds':>9} {'p_c':>9} {'p(1|c)':>8}")
for mu in [0.06, 0.3, 1.0, 2.0, 4.0]:
    sol = optimal_usd(ProtocolParams(mu, F))
    print(f"{mu:>6} {sol.regime.name:>6} {sol.q_ss:9.6f} {sol.q_ds:9.6f} {sol.p_c:9.6f} {sol.p1c:8.4f}")

# At large decoy fractions only decoys are ever identified.
sol = optimal_usd(ProtocolParams(0.1, 0.9))
print(f"\nf = 0.9, mu = 0.1: regime {sol.regime.name}, p(j|c) = {sol.p_cond}")

# Coarse brute force: the best feasible (s, s, d) on a 0.01 grid cannot beat the optimum.
mu = 1.0
best = max(
    (1 - F) * s + F * d
    for s in np.arange(0, 1.001, 0.01)
    for d in np.arange(0, 1.001, 0.01)
    if usd_feasible(mu, (s, s, d))
)
print(f"\nmu = {mu}: grid best {best:.4f} <= optimum {optimal_usd(ProtocolParams(mu, F)).p_c:.4f}")

"""Click statistics of the sequential attack and the resulting gain.

Tabulates the mean number of resent signals per block and shows how the
gain saturates as the attack depth M_max grows.
"""

from cowzero.analytics import brute_force_p_click, gain_zero, p_click, p_click_recursive
from cowzero.usd import ProtocolParams, optimal_usd

p = optimal_usd(ProtocolParams(1.0, 0.5)).p1c
print(f"p(1|c) = {p:.4f}")
print(f"{'k':>2} {'closed':>10} {'recursion':>10} {'enumerated':>10}")
for k in range(2, 8):
    print(f"{k:>2} {p_click(k, p):10.6f} {p_click_recursive(k, p):10.6f} "
          f"{brute_force_p_click(k, (p, p, 1 - 2 * p)):10.6f}")

print("\nfield-trial intensities, f = 0.155:")
for mu in [0.06, 0.1]:
    g = gain_zero(ProtocolParams(mu, 0.155, 10))
    print(f"  mu = {mu}: G_zero = {g:.4e}")

print("\ngain against attack depth at mu = 0.5:")
for m in [2, 4, 8, 16, 32]:
    print(f"  M_max = {m:>2}: {gain_zero(ProtocolParams(0.5, 0.155, m)):.12f}")

"""Largest safe intensity and the key-rate bound against transmittance.

At low transmittance the safe intensity is linear in eta, so the key rate
bound falls off as eta squared.
"""

import numpy as np

from cowzero.bounds import mu_max, sweep_r_upp
from cowzero.reproduce import loglog_slope, mu_max_asymptote

F = 0.155
print(f"asymptotic mu_max / eta = {mu_max_asymptote(F):.5f}")
for eta in (1e-5, 1e-4, 1e-3, 1e-2, 1e-1):
    print(f"  eta = {eta:.0e}: mu_max / eta = {mu_max(eta, F) / eta:.5f}")

rows = sweep_r_upp(np.logspace(-4, -2, 21), F)
slope = loglog_slope([r[0] for r in rows], [r[1] for r in rows])
print(f"\nlog-log slope of R_upp over eta in [1e-4, 1e-2]: {slope:.4f}")
for eta, r, eta2 in rows[::5]:
    print(f"  eta = {eta:.1e}: R_upp = {r:.3e}  (eta^2 = {eta2:.1e})")

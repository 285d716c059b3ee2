"""Fibre lengths beyond which the attack is invisible.

Recomputes the crossing distance for the two field trials and for a link
built from state-of-the-art components.
"""

import math

from cowzero.analytics import gain_zero
from cowzero.bounds import expected_gain, l_zero
from cowzero.reproduce import REPORTED_THIS_ATTACK, field_trial, standard_link

for mu in (0.06, 0.1):
    channel, params = field_trial(mu)
    L = l_zero(channel, params)
    log_g, reported = REPORTED_THIS_ATTACK[mu]
    print(f"field trial mu = {mu}: log10 G_zero = {math.log10(gain_zero(params)):.2f}, "
          f"L_zero = {L:.1f} km (reported {reported:.0f})")

channel, params = standard_link()
L = l_zero(channel, params)
print(f"\nstandard fibre link: L_zero = {L:.2f} km")
for d in (10, 20, L, 30, 40):
    g = expected_gain(channel, params, d)
    tag = "attack hidden" if g <= gain_zero(params) else "attack visible"
    print(f"  {d:6.2f} km: honest gain {g:.4e}  {tag}")

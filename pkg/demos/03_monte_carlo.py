"""Monte Carlo run of the attack against an honest-looking receiver.

The simulated gain should match the analytic value within a few standard
errors, and the receiver should never see an error or a broken coherence
check.
"""

from cowzero.analytics import BlockDistribution, gain_zero
from cowzero.simulation import run_simulation
from cowzero.usd import ProtocolParams, optimal_usd

params = ProtocolParams(0.06, 0.155, 10)
rep = run_simulation(params, 2_000_000, seed=1, segments=4)

g = gain_zero(params)
print(f"simulated gain {rep.gain_estimate:.4e} +/- {rep.gain_std_error:.1e}")
print(f"analytic gain  {g:.4e}  ({(rep.gain_estimate - g) / rep.gain_std_error:+.2f} SE)")
print(f"bit errors {rep.qber_violations}, broken monitored pairs {rep.monitored_pair_violations}")

expected = BlockDistribution.from_pc(optimal_usd(params).p_c, params.m_max).as_list()
total = sum(rep.block_length_histogram)
print("\nblock length  observed  expected")
for k, (obs, p) in enumerate(zip(rep.block_length_histogram, expected)):
    print(f"{k:>12}  {obs / total:.6f}  {p:.6f}")

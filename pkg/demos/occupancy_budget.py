"""Where the phonons come from: thermal, backaction and injected noise versus gain.

Run: python3 demos/occupancy_budget.py
"""
import numpy as np

from optofeedback import closed_form as cf
from optofeedback.params import FeedbackConfig, device_params, device_tones

params = device_params()          # membrane device at 20 mK, n_add = 2.5, n_c = 0.42
probe = device_tones().probe      # G_p / 2 pi = 6.32 kHz
phase = cf.optimal_phase(params)  # loop phase that turns all of gamma_fb into damping

print(f"bath occupancy n_m^T = {params.n_m_thermal:.1f}")
print(f"{'gamma_fb/gamma':>15} {'n_T':>9} {'n_ba':>9} {'n_fb':>9} {'n_m':>9}")
for ratio in np.geomspace(1, 1e6, 13):
    a0 = cf.gain_for_damping(params, probe, ratio * params.gamma)
    b = cf.occupancy_budget(params, probe, FeedbackConfig(a0, phase))
    print(f"{ratio:15.3g} {b.n_T:9.3f} {b.n_ba:9.3f} {b.n_fb:9.3f} {b.n_m:9.3f}")

# the optimum balances residual thermal motion against noise fed back by the loop
a0, best = cf.minimum_occupancy(params, probe)
print(f"\nminimum n_m = {best.n_m:.3f} at gamma_eff / 2 pi = {best.gamma_eff / 2 / np.pi:.1f} Hz")
print(f"  thermal {best.n_T:.3f}, cavity backaction {best.n_ba:.3f}, injected {best.n_fb:.3f}")

# without thermal photons in the cavity the same loop reaches below one phonon
_, cold = cf.minimum_occupancy(params.replace(n_c_thermal=0.0), probe)
print(f"without cavity heating: minimum n_m = {cold.n_m:.3f}")

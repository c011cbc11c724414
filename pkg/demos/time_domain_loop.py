"""Stochastic simulation of the digital loop against the closed-form damping.

The quality factor is scaled down so that a run spans thousands of decay
times; the scaled rates are quoted back in physical units.

Run: python3 demos/time_domain_loop.py
"""
import math

from optofeedback import closed_form as cf, timedomain as td
from optofeedback.params import FeedbackConfig, device_params, device_tones

params, tones = device_params(), device_tones()
best = cf.optimal_phase(params)

print(f"{'ratio':>6} {'dphi':>6} {'gamma_eff sim/cf':>17} {'n sim':>9} {'n cf':>9}")
for ratio in (2, 10, 100):
    for dphi in (0.0, 0.5):
        a0 = cf.gain_for_damping(params, tones.probe, ratio * params.gamma)
        fb = FeedbackConfig(a0, best + dphi)
        sim = td.SimConfig.auto(params, tones, fb, seed=ratio, decay_times=4000)
        res = td.simulate(params, tones, fb, sim)
        print(f"{ratio:6d} {dphi:6.2f} {res.gamma_eff_fit / res.gamma_eff_expected:17.4f} "
              f"{res.occupancy:9.2f} {res.occupancy_expected:9.2f}")

# a loop with the wrong sign heats the oscillator until the run is flagged
fb = FeedbackConfig(cf.gain_for_damping(params, tones.probe, 2 * params.gamma), best + math.pi)
res = td.simulate(params, tones, fb, td.SimConfig.auto(params, tones, fb, decay_times=200))
print(f"\nphase flipped by pi: unstable = {res.unstable}")

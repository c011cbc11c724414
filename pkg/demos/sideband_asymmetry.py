"""Sideband asymmetry of a weak readout tone, with and without cavity Kerr modulation.

The raw asymmetry eta = (A- - A+) / A- of an ideal thermometer is 1 / (n + 1).
Cavity noise squashing pushes it negative at low gain, and a slow Kerr
modulation shifts it further while keeping the total weight.

Run: python3 demos/sideband_asymmetry.py
"""
import numpy as np

from optofeedback import closed_form as cf, floquet
from optofeedback.inference import KerrTemplate
from optofeedback.params import device_params, device_tones, hz

params, tones = device_params(), device_tones()
unit = cf.gain_for_damping(params, tones.probe, params.gamma)  # gain label 1 = gamma_fb of gamma
template = KerrTemplate(params, tones, unit)

print(f"{'gain':>8} {'n_m':>9} {'eta K=0':>9} {'eta K=1.2k':>11} {'total ratio':>12}")
for ratio in np.geomspace(10, 3e4, 10):
    plain = template.problem(ratio, 0.0)
    kerr = template.problem(ratio, hz(1.2e3))
    a0 = floquet.model_weights(plain)
    a1 = floquet.model_weights(kerr)
    eta0 = (a0[1] - a0[0]) / a0[1]
    eta1 = (a1[1] - a1[0]) / a1[1]
    print(f"{ratio:8.3g} {plain.mech_occupancy_eff:9.3f} {eta0:9.4f} {eta1:11.4f} "
          f"{sum(a1) / sum(a0):12.4f}")

# correcting transduction and detuning restores n from the two weights
problem = template.problem(1e3, hz(1.2e3))
lo, hi = floquet.peak_grid(problem)
spec = floquet.output_spectrum(problem, np.concatenate([lo, hi]))
w = floquet.sideband_weights(spec, problem)
n = cf.occupancy_from_asymmetry(*w.corrected())
print(f"\nat gain 1e3: corrected asymmetry gives n = {n:.3f}, model n = "
      f"{problem.mech_occupancy_eff:.3f}")

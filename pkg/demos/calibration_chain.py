"""Calibration chain on synthetic data: added noise, thermometry gain, then Kerr amplitude.

Run: python3 demos/calibration_chain.py
"""
import numpy as np

from optofeedback import closed_form as cf, inference, synthetic
from optofeedback.params import device_params, device_tones, hz

# 1. added noise from a family of sideband-cooling traces spanning 40 dB of power
params = device_params()
couplings = np.geomspace(10.0, 1e3, 6)
traces = synthetic.nadd_family(params, (couplings / couplings[0]) ** 2, hz(couplings[0]),
                               n_add=2.5, gain=3.7, noise=0.01, heating_slope=0.3)
cal = inference.calibrate_n_add(traces, params)
print(f"n_add = {cal.n_add_fit:.3f} +- {cal.n_add_stderr:.3f} (injected 2.5)")

# 2. phonons per unit peak area from a thermometry-only sweep at 50 mK
warm = device_params(temperature=50e-3, n_add=cal.n_add_fit)
det, g_ref = hz(-48e3), hz(1.65e3)
sweep = synthetic.thermometry_sweep(warm, [hz(g) for g in np.geomspace(100, 1650, 6)], det,
                                    gain=2.0)
therm = inference.calibrate_thermometry(sweep, warm, detuning=det, g_ref=g_ref)
truth = synthetic.thermometry_truth(warm, g_ref, det, gain=2.0)
print(f"c_ref = {therm.c_ref:.5g} (exact {truth:.5g}), n at g_ref = {therm.n_ref:.2f}")

# 3. Kerr amplitude from the asymmetry-versus-gain curve
tones = device_tones()
template = inference.KerrTemplate(params, tones,
                                  cf.gain_for_damping(params, tones.probe, 500 * params.gamma))
curve = synthetic.kerr_curve(template, np.geomspace(0.2, 8, 13), hz(1.2e3), noise=0.001)
fit = inference.fit_kerr(curve, template)
print(f"K_eff / 2 pi = {fit.k_eff / 2 / np.pi:.0f} +- {fit.stderr / 2 / np.pi:.0f} Hz "
      f"(injected 1200), gain scale {fit.gain_scale:.3f}")

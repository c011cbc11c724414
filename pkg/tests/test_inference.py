import math

import numpy as np
import pytest

from optofeedback import closed_form, inference, synthetic
from optofeedback.closed_form import NonPhysicalAsymmetryError
from optofeedback.params import device_params, device_tones, hz
from optofeedback.spectrum import Spectrum


def peak(noise=0.0, seed=0, n=801, baseline=3.0):
    w = np.linspace(-50.0, 50.0, n)
    psd = inference.lorentzian(w, 1.5, 6.0, 20.0, baseline)
    rng = np.random.default_rng(seed)
    return Spectrum(w, psd * (1 + noise * rng.standard_normal(n)))


def test_lorentzian_noiseless_recovery():
    fit = inference.fit_lorentzian(peak())
    assert fit.center == pytest.approx(1.5, rel=1e-8)
    assert fit.fwhm == pytest.approx(6.0, rel=1e-8)
    assert fit.area == pytest.approx(0.5 * math.pi * 20 * 6, rel=1e-8)
    assert fit(1.5) == pytest.approx(23.0)


def test_lorentzian_errors_are_calibrated():
    pulls = []
    for seed in range(40):
        fit = inference.fit_lorentzian(peak(0.03, seed), relative=True)
        pulls.append((fit.area - 0.5 * math.pi * 120) / fit.area_stderr)
    pulls = np.array(pulls)
    assert abs(pulls.mean()) < 0.6 and 0.6 < pulls.std() < 1.5


def test_lorentzian_errors_with_additive_noise():
    rng = np.random.default_rng(5)
    pulls = []
    for _ in range(40):
        clean = peak()
        noisy = Spectrum(clean.frequencies, clean.psd + 0.3 * rng.standard_normal(len(clean)))
        fit = inference.fit_lorentzian(noisy)
        pulls.append((fit.area - 0.5 * math.pi * 120) / fit.area_stderr)
    assert 0.6 < np.std(pulls) < 1.5


def test_lorentzian_window_and_degenerate_input():
    fit = inference.fit_lorentzian(peak(), window=(-20, 20), relative=True)
    assert fit.fwhm == pytest.approx(6.0, rel=1e-6)
    flat = Spectrum(np.linspace(0, 1, 50), np.ones(50))
    with pytest.raises(inference.DegenerateWindowError):
        inference.fit_lorentzian(flat)
    with pytest.raises(inference.DegenerateWindowError):
        inference.fit_lorentzian(peak(), window=(0, 0.2))


def test_undersampled_peak_warns():
    with pytest.warns(RuntimeWarning, match="FWHM"):
        inference.fit_lorentzian(peak(n=81))


def test_extract_occupancy():
    est = inference.extract_occupancy((2.0, 0.01), (3.0, 0.01))
    assert est.n == pytest.approx(2.0)
    assert est.stderr > 0
    est = inference.extract_occupancy((2.0, 0.0), (2.0, 0.0), corrections=(1.0, 1.5))
    assert est.n == pytest.approx(2.0)
    with pytest.raises(NonPhysicalAsymmetryError):
        inference.extract_occupancy((3.0, 0.1), (2.0, 0.1))


def nadd_traces(couplings, seed=1, **kw):
    params = device_params()
    couplings = np.asarray(couplings, dtype=float)
    powers = (couplings / couplings[0]) ** 2
    return params, synthetic.nadd_family(params, powers, hz(couplings[0]), seed=seed, **kw)


def test_calibrate_n_add_round_trip():
    params, traces = nadd_traces(np.geomspace(10.0, 1e3, 6), n_add=1.7, gain=2.0,
                                 heating_slope=0.2, noise=0.005)
    res = inference.calibrate_n_add(traces, params)
    assert res.n_add_fit == pytest.approx(1.7, rel=0.02)
    assert res.gain == pytest.approx(2.0, rel=0.02)
    assert to_hz_ratio(res.g_shared) == pytest.approx(10.0, rel=0.02)
    assert res.heating_slope == pytest.approx(0.2, abs=0.05)
    assert '"n_add_fit"' in res.to_json()


def to_hz_ratio(g):
    return g / (2 * math.pi)


def test_calibrate_n_add_needs_a_family():
    params, traces = nadd_traces([10.0, 12.0, 14.0])
    with pytest.raises(inference.IdentifiabilityError):
        inference.calibrate_n_add(traces, params)
    with pytest.warns(RuntimeWarning):
        inference.calibrate_n_add(traces, params, strict=False)


def test_n_add_from_floor():
    s = Spectrum(np.arange(100.0), np.full(100, 2 * (2.5 + 0.5)))
    n, err = inference.n_add_from_floor(s, gain=2.0)
    assert n == pytest.approx(2.5) and err == 0.0
    n, _ = inference.n_add_from_floor(s, heterodyne_image_noise=True)
    assert n == pytest.approx(2.5)


def test_thermometry_round_trip_and_mismatch():
    params = device_params(temperature=50e-3)
    det, g_ref = hz(-48e3), hz(1.65e3)
    couplings = [hz(g) for g in (150.0, 400.0, 900.0, 1650.0)]
    sweep = synthetic.thermometry_sweep(params, couplings, det, gain=0.5, noise=0.003, seed=2)
    cal = inference.calibrate_thermometry(sweep, params, detuning=det, g_ref=g_ref)
    truth = synthetic.thermometry_truth(params, g_ref, det, gain=0.5)
    assert cal.c_ref == pytest.approx(truth, rel=0.02)
    assert cal.occupancy(cal.a_ref) == pytest.approx(cal.n_ref)
    with pytest.raises(inference.ModelMismatchError):
        inference.calibrate_thermometry(sweep, params, detuning=-det, g_ref=g_ref)
    # a trace whose gain drifted is an outlier of the collective fit
    bent = sweep[:-1] + [(sweep[-1][0], sweep[-1][1].scaled(1.5))]
    with pytest.raises(inference.ModelMismatchError):
        inference.calibrate_thermometry(bent, params, detuning=det, g_ref=g_ref)


def test_fit_kerr_recovers_amplitude():
    params, tones = device_params(), device_tones()
    unit = closed_form.gain_for_damping(params, tones.probe, 500 * params.gamma)
    template = inference.KerrTemplate(params, tones, unit)
    curve = synthetic.kerr_curve(template, [0.2, 0.5, 1.0, 2.0, 5.0], hz(3e3), noise=0.0005,
                                 seed=1)
    fit = inference.fit_kerr(curve, template, fit_gain_scale=False)
    assert fit.k_eff == pytest.approx(hz(3e3), rel=0.05)
    assert fit.gain_scale == 1.0 and fit.stderr > 0


def test_fit_kerr_flat_misfit_is_unidentifiable():
    params, tones = device_params(n_c_thermal=0.0), device_tones(g_probe_hz=0.0)
    template = inference.KerrTemplate(params, tones, 1.0)
    with pytest.raises(inference.IdentifiabilityError):
        inference.fit_kerr([(0.5, -0.13), (1.0, -0.13), (2.0, -0.13)], template)
    with pytest.raises(ValueError):
        inference.fit_kerr([(1.0, 0.1)], template)

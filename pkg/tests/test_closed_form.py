import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from optofeedback import closed_form as cf
from optofeedback.params import FeedbackConfig, device_params, device_tones, hz


@pytest.fixture
def device():
    return device_params(), device_tones()


def analytic_minimum(params, probe):
    """Optimum of n_m(A0) = (alpha + beta A0^2) / (gamma + b A0) - 1/2 in high precision."""
    mpmath.mp.dps = 30
    k, ke, wm = (mpmath.mpf(v) for v in (params.kappa, params.kappa_e, params.omega_m))
    g, G = mpmath.mpf(params.gamma), mpmath.mpf(probe.g_eff)
    R2 = k ** 2 + 4 * wm ** 2
    b = 4 * G / mpmath.sqrt(R2)
    alpha = g * (params.n_m_thermal + mpmath.mpf(1) / 2) + 4 * G ** 2 / k * k ** 2 / R2 * (
        1 + 2 * mpmath.mpf(params.n_c_thermal))
    beta = (params.n_add + mpmath.mpf(1) / 2 + 8 * k * ke / R2 * params.n_c_thermal) / (2 * ke)
    a0 = (-g + mpmath.sqrt(g ** 2 + b ** 2 * alpha / beta)) / b
    n = (alpha + beta * a0 ** 2) / (g + b * a0) - mpmath.mpf(1) / 2
    return float(a0), float(n)


def test_optimal_phase_maximises_damping(device):
    params, tones = device
    mpmath.mp.dps = 30
    k, wm = mpmath.mpf(params.kappa), mpmath.mpf(params.omega_m)
    # damping ~ sin(phi - theta) with theta = atan(2 omega_m / kappa)
    best = mpmath.atan(2 * wm / k) + mpmath.pi / 2
    assert cf.optimal_phase(params) == pytest.approx(float(best), abs=1e-14)


@given(st.floats(0, 2 * math.pi), st.floats(0, 1e5))
@settings(deadline=None, max_examples=60)
def test_gamma_eff_sine_form(phi, a0):
    params, tones = device_params(), device_tones()
    theta = math.atan2(2 * params.omega_m, params.kappa)
    fb = FeedbackConfig(a0, phi)
    expected = params.gamma + cf.gamma_fb(params, tones.probe, fb) * math.sin(phi - theta)
    got = cf.gamma_eff(params, tones.probe, fb)
    assert got.gamma_eff == pytest.approx(expected, rel=1e-12, abs=1e-12 * params.gamma)
    assert got.stable == (expected > 0)


@given(st.floats(0, 2 * math.pi), st.floats(0, 3e4), st.booleans())
@settings(deadline=None, max_examples=80)
def test_budget_identity(phi, a0, zero_point):
    params, tones = device_params(), device_tones()
    fb = FeedbackConfig(a0, phi)
    assume(cf.gamma_eff(params, tones.probe, fb).gamma_eff > 1e-3 * params.gamma)
    b = cf.occupancy_budget(params, tones.probe, fb, zero_point=zero_point)
    half = 0.5 if zero_point else 0.0
    assert b.n_T + b.n_ba + b.n_fb == pytest.approx(b.n_m + half, rel=1e-12)
    assert min(b.n_T, b.n_ba, b.n_fb) >= 0


def test_budget_without_feedback(device):
    params, tones = device
    b = cf.occupancy_budget(params, tones.probe, FeedbackConfig(0.0, 0.0))
    assert b.gamma_eff == params.gamma
    assert b.n_T == pytest.approx(params.n_m_thermal + 0.5)
    assert b.n_fb == 0.0


def test_gain_for_damping_inverts_gamma_fb(device):
    params, tones = device
    a0 = cf.gain_for_damping(params, tones.probe, 123.0 * params.gamma)
    assert cf.gamma_fb(params, tones.probe, FeedbackConfig(a0)) == pytest.approx(123 * params.gamma)


@pytest.mark.parametrize("n_c", [0.0, 0.42, 2.0])
def test_minimum_matches_analytic_optimum(n_c):
    params, tones = device_params(n_c_thermal=n_c), device_tones()
    a0, best = cf.minimum_occupancy(params, tones.probe)
    a0_ref, n_ref = analytic_minimum(params, tones.probe)
    assert best.n_m == pytest.approx(n_ref, rel=1e-9)
    assert a0 == pytest.approx(a0_ref, rel=1e-4)


def test_reference_operating_point_minimum(device):
    params, tones = device
    _, best = cf.minimum_occupancy(params, tones.probe)
    assert 1.2 <= best.n_m <= 2.0
    assert best.n_ba > best.n_T  # cavity heating dominates at the optimum


def test_instability_raised():
    params, tones = device_params(), device_tones()
    fb = FeedbackConfig(cf.gain_for_damping(params, tones.probe, 10 * params.gamma),
                        cf.optimal_phase(params) + math.pi)
    assert not cf.gamma_eff(params, tones.probe, fb).stable
    with pytest.raises(cf.InstabilityError):
        cf.occupancy_budget(params, tones.probe, fb)


@given(st.floats(0.0, 1e4), st.floats(1e-3, 1e3))
def test_asymmetry_inversion(n, scale):
    a_plus, a_minus = scale * n, scale * (n + 1)
    assert cf.occupancy_from_asymmetry(a_plus, a_minus) == pytest.approx(n, rel=1e-9, abs=1e-12)
    assert cf.asymmetry_eta(a_plus, a_minus) == pytest.approx(1 / (n + 1), rel=1e-9)


@pytest.mark.parametrize("a_plus, a_minus", [(2.0, 1.0), (1.0, 1.0), (-1.0, 2.0)])
def test_asymmetry_rejects_unphysical(a_plus, a_minus):
    with pytest.raises(cf.NonPhysicalAsymmetryError):
        cf.occupancy_from_asymmetry(a_plus, a_minus)


def test_cavity_noise_and_cooling_rate(device):
    params, _ = device
    assert np.all(np.asarray(cf.cavity_noise_psd(params, np.linspace(-1e7, 1e7, 11))) >= 0)
    tone = device_tones().thermometry.__class__(-params.omega_m, hz(1e3))
    k, wm, G = params.kappa, params.omega_m, tone.g_eff
    expected = G ** 2 * k * (1 / (k ** 2 / 4) - 1 / (k ** 2 / 4 + 4 * wm ** 2))
    assert cf.sideband_cooling_rate(params, tone) == pytest.approx(expected, rel=1e-12)

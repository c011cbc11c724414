import math

import numpy as np
import pytest

from optofeedback import closed_form, timedomain as td
from optofeedback.params import FeedbackConfig, device_params, device_tones, hz


def loop(ratio, offset=0.0):
    params, tones = device_params(), device_tones()
    a0 = closed_form.gain_for_damping(params, tones.probe, ratio * params.gamma)
    return params, tones, FeedbackConfig(a0, closed_form.optimal_phase(params) + offset)


@pytest.mark.parametrize("phase", [0.3, 2.3, -2.0])
def test_chain_hits_phase_with_unit_gain(phase):
    wm = hz(707.2e3)
    dt = 2 * math.pi / (24 * wm)
    chain = td.design_chain(wm, 0.05 * wm, phase, 1.0, dt)
    h = chain.response(wm, include_gain=True)[0]
    assert abs(h) == pytest.approx(1.0, rel=1e-9)
    assert abs(chain.phase_error_deg()) < 0.01
    assert chain.is_stable()


@pytest.mark.parametrize("ratio, offset", [(10.0, 0.0), (100.0, 0.5), (10.0, -0.8)])
def test_ringdown_matches_closed_form(ratio, offset):
    params, tones, fb = loop(ratio, offset)
    scale = td.auto_scale(params, tones, fb)
    rate, freq = td.ringdown(params, tones, fb, scale)
    expected = closed_form.gamma_eff(params, tones.probe, fb).gamma_eff * scale
    assert rate == pytest.approx(expected, rel=0.02)
    # the loop also pulls the frequency by gamma_fb cos(phi - theta) / 2
    theta = math.atan2(2 * params.omega_m, params.kappa)
    shift = closed_form.gamma_fb(params, tones.probe, fb) * scale * math.cos(fb.phase_phi - theta) / 2
    assert freq - params.omega_m == pytest.approx(shift, rel=0.05, abs=0.02 * expected)


def test_simulation_is_deterministic_per_seed():
    params, tones, fb = loop(10.0)
    sim = td.SimConfig.auto(params, tones, fb, seed=3, decay_times=200)
    a = td.simulate(params, tones, fb, sim)
    b = td.simulate(params, tones, fb, sim)
    c = td.simulate(params, tones, fb, td.SimConfig.auto(params, tones, fb, seed=4, decay_times=200))
    assert np.array_equal(a.trajectory.x, b.trajectory.x)
    assert a.gamma_eff_fit == b.gamma_eff_fit
    assert not np.array_equal(a.trajectory.x, c.trajectory.x)


def test_short_run_linewidth_and_occupancy():
    params, tones, fb = loop(10.0)
    sim = td.SimConfig.auto(params, tones, fb, seed=1, decay_times=2000)
    res = td.simulate(params, tones, fb, sim)
    assert not res.unstable
    assert res.gamma_eff_fit == pytest.approx(res.gamma_eff_expected, rel=0.12)
    assert res.occupancy == pytest.approx(res.occupancy_expected, rel=0.12)
    assert res.summary()["chain_phase_error_deg"] < 0.01


def test_wrong_phase_is_flagged_unstable():
    params, tones, fb = loop(2.0, math.pi)
    scale = td.auto_scale(params, tones, fb)
    sim = td.SimConfig.auto(params, tones, fb, seed=0, decay_times=200, scale_q=scale)
    res = td.simulate(params, tones, fb, sim)
    assert res.unstable and math.isnan(res.gamma_eff_fit)


def test_config_validation():
    with pytest.raises(ValueError):
        td.SimConfig(dt=0.0, duration=1.0)
    with pytest.raises(ValueError):
        td.SimConfig(dt=1.0, duration=10.0, noise_dt=0.3)
    assert td.SimConfig(dt=1.0, duration=10.0, noise_dt=0.25).substeps == 4
    params, tones, fb = loop(10.0)
    coarse = td.SimConfig(dt=2 * math.pi / (10 * params.omega_m), duration=1.0)
    with pytest.raises(ValueError):
        td.simulate(params, tones, fb, coarse)
    short = td.SimConfig.auto(params, tones, fb, decay_times=1)
    with pytest.raises(ValueError):
        td.simulate(params, tones, fb, td.SimConfig(short.dt, 5 * short.dt))


def test_estimate_psd_parseval():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(1 << 16)
    spec = td.estimate_psd(x, 1024, dt=1e-3)
    dw = spec.frequencies[1] - spec.frequencies[0]
    assert np.sum(spec.psd) * dw / (2 * np.pi) == pytest.approx(np.var(x), rel=0.05)
    with pytest.raises(td.LengthError):
        td.estimate_psd(x[:4000], 1024, dt=1e-3)
    with pytest.raises(ValueError):
        td.estimate_psd(x, 1024)


def test_trajectory_csv_header():
    t = td.Trajectory(np.arange(3.0), np.ones(3), np.zeros(3), np.zeros(3), 1.0)
    lines = t.to_csv().splitlines()
    assert lines[0].startswith("# schema_version") and lines[1] == "time_s,x,p,feedback_force"

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import constants

from optofeedback.params import (DEVICE_HZ, FeedbackConfig, KerrModulation, SystemParams, Tone,
                                 ToneSet, device_params, device_tones, hz, thermal_occupancy,
                                 to_hz, validate)


def bose_oracle(temperature, omega):
    mpmath.mp.dps = 40
    x = mpmath.mpf(constants.hbar) * omega / (mpmath.mpf(constants.k) * temperature)
    return float(1 / mpmath.expm1(x))


@pytest.mark.parametrize("temperature", [1e-3, 20e-3, 50e-3, 1.0, 300.0])
def test_thermal_occupancy_matches_high_precision(temperature):
    omega = hz(DEVICE_HZ["f_m"])
    assert thermal_occupancy(temperature, omega) == pytest.approx(
        bose_oracle(temperature, omega), rel=1e-12)


def test_thermal_occupancy_edge_cases():
    assert thermal_occupancy(0.0, 1.0) == 0.0
    n = thermal_occupancy(np.array([0.0, 20e-3]), hz(707.2e3))
    assert n.shape == (2,) and n[0] == 0.0 and 550 < n[1] < 600
    with pytest.raises(ValueError):
        thermal_occupancy(-1.0, 1.0)
    with pytest.raises(ValueError):
        thermal_occupancy(1.0, 0.0)


@given(st.floats(1e-3, 1e9))
def test_hz_round_trip(f):
    assert to_hz(hz(f)) == pytest.approx(f, rel=1e-15)


def test_device_params_and_kappa():
    p = device_params()
    assert p.kappa == pytest.approx(hz(1.5e6))
    assert p.n_c_thermal == 0.42 and p.n_add == 2.5
    assert p.to_hz()["f_m"] == pytest.approx(707.2e3)
    back = SystemParams.from_hz(**p.to_hz())
    assert back.omega_m == pytest.approx(p.omega_m, rel=1e-15)
    assert validate(p).ok


def test_validate_lists_every_problem():
    bad = SystemParams(1.0, 2.0, -1.0, 0.0, 1.0, n_add=-1.0)
    report = validate(bad)
    assert not report
    text = str(report)
    for word in ("gamma", "kappa_i", "n_add", "omega_m must be below"):
        assert word in text


def test_toneset_derives_and_checks_delta():
    tones = device_tones()
    assert tones.delta == pytest.approx(hz(-48e3))
    assert tones.thermometry.detuning == pytest.approx(hz(-50e3))
    with pytest.raises(ValueError):
        ToneSet(Tone(0.0), Tone(1.0), delta=2.0)
    swapped = tones.with_couplings(g_probe=0.0)
    assert swapped.probe.g_eff == 0.0 and swapped.thermometry == tones.thermometry


@pytest.mark.parametrize("factory", [lambda: Tone(0.0, -1.0), lambda: FeedbackConfig(-1.0),
                                     lambda: KerrModulation(-1.0)])
def test_negative_magnitudes_rejected(factory):
    with pytest.raises(ValueError):
        factory()


def test_replace_keeps_other_fields():
    p = device_params()
    q = p.replace(n_add=0.0)
    assert q.n_add == 0.0 and q.gamma == p.gamma
    assert math.isclose(p.as_dict()["kappa_e"], p.kappa_e)

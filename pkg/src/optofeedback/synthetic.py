"""Synthetic measurement data drawn from the forward models, for round-trip checks."""
from __future__ import annotations

import math

import numpy as np

from .inference import (KerrTemplate, _heating, calibration_grid, calibration_problem,
                        model_peak_area, thermometry_tones)
from .floquet import FloquetProblem, output_spectrum, peak_grid
from .params import SystemParams
from .spectrum import Spectrum


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def nadd_family(params: SystemParams, powers, g_unit, n_add=2.5, gain=1.0, noise=0.01,
                heating_slope=0.0, heating_threshold=0.5, detuning=None, points=401, seed=0):
    """Sideband-cooling traces ``[(power, Spectrum)]`` with multiplicative Gaussian noise.

    The coupling at power ``P`` is ``g_unit * sqrt(P)``; above
    ``heating_threshold`` times the largest power the bath occupancy rises
    linearly with ``heating_slope``.
    """
    rng = _rng(seed)
    detuning = -params.omega_m if detuning is None else detuning
    powers = np.asarray(powers, dtype=float)
    heat = _heating(powers, powers.max(), heating_threshold, heating_slope)
    p = params.replace(n_add=n_add)
    out = []
    for power, h in zip(powers, heat):
        g = g_unit * math.sqrt(power)
        problem = calibration_problem(p, g, detuning, params.n_m_thermal * h)
        grid = calibration_grid(p, g, detuning, points)
        psd = gain * output_spectrum(problem, grid).psd
        psd = psd * (1.0 + noise * rng.standard_normal(psd.size))
        out.append((float(power), Spectrum(grid, np.maximum(psd, 0.0))))
    return out


def thermometry_sweep(params: SystemParams, couplings, detuning, gain=1.0, noise=0.005,
                      points=401, widths=8.0, seed=0):
    """Single-tone anti-Stokes traces ``[(g, Spectrum)]`` at each thermometry coupling."""
    rng = _rng(seed)
    out = []
    for g in couplings:
        problem = FloquetProblem(params, thermometry_tones(params, g, detuning))
        _, grid = peak_grid(problem, points, widths)
        psd = gain * output_spectrum(problem, grid).psd
        psd = psd * (1.0 + noise * rng.standard_normal(psd.size))
        out.append((float(g), Spectrum(grid, np.maximum(psd, 0.0))))
    return out


def thermometry_truth(params: SystemParams, g_ref, detuning, gain=1.0):
    """Exact ``c_ref`` for data made by :func:`thermometry_sweep` with this gain."""
    from .inference import _occupancy_under_cooling

    n_ref = _occupancy_under_cooling(params, g_ref, detuning, params.n_m_thermal)
    return n_ref / (gain * model_peak_area(params, g_ref, detuning))


def kerr_curve(template: KerrTemplate, gains, k_eff, gain_scale=1.0, noise=0.003, seed=0):
    """Asymmetry-versus-gain points ``[(gain, eta)]`` with additive Gaussian noise."""
    rng = _rng(seed)
    gains = np.asarray(gains, dtype=float)
    eta = template.curve(gains, k_eff, gain_scale)
    eta = eta + noise * rng.standard_normal(eta.size)
    return [(float(g), float(e)) for g, e in zip(gains, eta)]

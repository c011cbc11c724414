"""Closed-form feedback-cooling budget, asymmetry thermometry and cavity noise."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import FeedbackConfig, SystemParams, Tone


class InstabilityError(ArithmeticError):
    """Effective mechanical damping is not positive (anti-damping)."""

    def __init__(self, gamma_eff):
        super().__init__(f"unstable: effective damping {gamma_eff:.6g} rad/s <= 0")
        self.gamma_eff = gamma_eff


class NonPhysicalAsymmetryError(ValueError):
    """Stokes weight does not exceed the anti-Stokes weight."""


@dataclass(frozen=True)
class DampingResult:
    gamma_eff: float
    stable: bool


@dataclass(frozen=True)
class OccupancyBudget:
    n_T: float
    n_ba: float
    n_fb: float
    n_m: float
    gamma_eff: float
    c_eff: float
    zero_point: bool = True


def _root(params):
    return math.sqrt(params.kappa ** 2 + 4.0 * params.omega_m ** 2)


def optimal_phase(params: SystemParams) -> float:
    """Feedback phase maximising the damping: sin = kappa/root, cos = -2 omega_m/root."""
    return math.atan2(params.kappa, -2.0 * params.omega_m)


def gamma_fb(params: SystemParams, probe: Tone, fb: FeedbackConfig) -> float:
    return 4.0 * probe.g_eff * fb.gain_a0 / _root(params)


def gamma_eff(params: SystemParams, probe: Tone, fb: FeedbackConfig) -> DampingResult:
    """Feedback-damped linewidth. ``stable`` is False when it is not positive."""
    k, wm = params.kappa, params.omega_m
    angle = (k * math.sin(fb.phase_phi) - 2.0 * wm * math.cos(fb.phase_phi)) / _root(params)
    g = params.gamma + gamma_fb(params, probe, fb) * angle
    return DampingResult(g, g > 0)


def occupancy_budget(params: SystemParams, probe: Tone, fb: FeedbackConfig,
                     zero_point=True) -> OccupancyBudget:
    """Thermal, backaction and noise-injection contributions to the final occupancy.

    With ``zero_point=False`` every vacuum half-quantum is dropped (classical
    limit) and ``n_m = n_T + n_ba + n_fb``; otherwise ``n_m + 1/2`` equals the sum.
    """
    damping = gamma_eff(params, probe, fb)
    if not damping.stable:
        raise InstabilityError(damping.gamma_eff)
    g_eff = damping.gamma_eff
    k, ke, wm = params.kappa, params.kappa_e, params.omega_m
    half = 0.5 if zero_point else 0.0
    lorentz = k * k / (k * k + 4.0 * wm * wm)
    c_eff = 4.0 * probe.g_eff ** 2 / (k * g_eff)
    n_T = params.gamma / g_eff * (params.n_m_thermal + half)
    n_ba = c_eff * lorentz * (2.0 * half + 2.0 * params.n_c_thermal)
    noise = params.n_add + half + 8.0 * k * ke / (k * k + 4.0 * wm * wm) * params.n_c_thermal
    n_fb = fb.gain_a0 ** 2 / (2.0 * ke * g_eff) * noise
    n_m = n_T + n_ba + n_fb - half
    return OccupancyBudget(float(n_T), float(n_ba), float(n_fb), float(n_m), float(g_eff),
                           float(c_eff), zero_point)


def gain_for_damping(params: SystemParams, probe: Tone, target_gamma_fb) -> float:
    """Amplitude gain A0 that produces the requested maximal feedback damping."""
    return target_gamma_fb * _root(params) / (4.0 * probe.g_eff)


def minimum_occupancy(params: SystemParams, probe: Tone, phase=None, a0_max=None, points=4001):
    """Scan A0 at fixed phase and return ``(a0, budget)`` at the lowest n_m.

    The coarse scan is refined by a bounded scalar minimisation around the best
    grid point.
    """
    from scipy.optimize import minimize_scalar

    phase = optimal_phase(params) if phase is None else phase
    if a0_max is None:
        # well past the optimum: noise injection grows as A0^2 / gamma_eff ~ A0
        a0_max = gain_for_damping(params, probe, 1e6 * params.gamma)
    grid = np.linspace(0.0, a0_max, points)
    values = np.array([occupancy_budget(params, probe, FeedbackConfig(a, phase)).n_m for a in grid])
    i = int(np.argmin(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    res = minimize_scalar(lambda a: occupancy_budget(params, probe, FeedbackConfig(a, phase)).n_m,
                          bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * a0_max})
    best = res.x if res.fun < values[i] else grid[i]
    return best, occupancy_budget(params, probe, FeedbackConfig(best, phase))


def occupancy_from_asymmetry(a_plus, a_minus) -> float:
    """Occupancy from anti-Stokes and Stokes weights, A+/(A- - A+)."""
    if a_plus < 0:
        raise NonPhysicalAsymmetryError(f"negative anti-Stokes weight {a_plus!r}")
    if not a_minus > a_plus:
        raise NonPhysicalAsymmetryError(
            f"Stokes weight {a_minus!r} must exceed anti-Stokes weight {a_plus!r}")
    return a_plus / (a_minus - a_plus)


def asymmetry_eta(a_plus, a_minus) -> float:
    """Normalised sideband asymmetry (A- - A+)/A-; negative when anti-Stokes dominates."""
    if not a_minus > 0:
        raise ValueError(f"Stokes weight must be positive, got {a_minus!r}")
    return (a_minus - a_plus) / a_minus


def cavity_noise_psd(params: SystemParams, omega):
    """Lorentzian noise emitted by the thermally populated cavity, in quanta.

    ``omega`` is measured on the same axis as ``params.omega_c``.
    """
    k = params.kappa
    omega = np.asarray(omega, dtype=float)
    out = params.kappa_e * k * params.n_c_thermal / ((omega - params.omega_c) ** 2 + (k / 2) ** 2)
    return float(out) if out.ndim == 0 else out


def sideband_cooling_rate(params: SystemParams, tone: Tone) -> float:
    """Optical damping of a single detuned tone (negative means anti-damping)."""
    k, wm, d = params.kappa, params.omega_m, tone.detuning
    hk2 = (k / 2) ** 2
    return tone.g_eff ** 2 * k * (1.0 / (hk2 + (d + wm) ** 2) - 1.0 / (hk2 + (d - wm) ** 2))

"""Frequency-domain solver for two tones plus a slowly modulated Kerr cavity.

The fluctuation fields are expanded in harmonics of the tone spacing and
truncated to the probe component ``a0``, the thermometry component ``a-1``
and the mechanical component ``b0``, together with their conjugates::

    v = [a0, a0+, b0, b0+, a-1, a-1+]

With ``x(t) = int dw/2pi exp(-i w t) x(w)`` the equations of motion become
``(-i w - A) v = B u`` for the input vector ``u``. Conjugate fields are kept as
independent unknowns and correlators are only applied when the spectrum is
assembled.

Input channel order (columns of ``B``)::

    0 a0_in,e   1 a0_in,e+   2 a0_in,i   3 a0_in,i+   4 b_in   5 b_in+
    6 a-1_in,e  7 a-1_in,e+  8 a-1_in,i  9 a-1_in,i+
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .closed_form import OccupancyBudget
from .params import KerrModulation, SystemParams, ToneSet
from .spectrum import Frame, Spectrum, params_hash

A0, A0D, B0, B0D, AM1, AM1D = range(6)
CHANNELS = ("a0_in_e", "a0_in_e_dag", "a0_in_i", "a0_in_i_dag", "b_in", "b_in_dag",
            "am1_in_e", "am1_in_e_dag", "am1_in_i", "am1_in_i_dag")


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, omega):
        super().__init__(f"Floquet system is singular at omega = {omega!r} rad/s")
        self.omega = omega


class WindowOverlapError(ValueError):
    """The two sideband integration windows overlap (linewidth too close to omega_m)."""


@dataclass(frozen=True)
class FloquetProblem:
    """Everything the truncated Floquet solver needs at one operating point.

    The feedback-cooled mechanics enters as an effective bath: damping
    ``mech_gamma_eff`` and occupancy ``mech_occupancy_eff``.
    """

    params: SystemParams
    tones: ToneSet
    kerr: KerrModulation = KerrModulation()
    mech_gamma_eff: float = None
    mech_occupancy_eff: float = None
    heterodyne_image_noise: bool = False
    floquet_order: int = 1

    def __post_init__(self):
        if self.mech_gamma_eff is None:
            object.__setattr__(self, "mech_gamma_eff", self.params.gamma)
        if self.mech_occupancy_eff is None:
            object.__setattr__(self, "mech_occupancy_eff", self.params.n_m_thermal)
        if self.mech_gamma_eff < self.params.gamma * (1 - 1e-12):
            raise ValueError("mech_gamma_eff must not be below the intrinsic damping")
        if self.mech_occupancy_eff < 0:
            raise ValueError("mech_occupancy_eff must be non-negative")
        if self.floquet_order != 1:
            raise NotImplementedError("only the {0, -1} truncation is implemented")

    @classmethod
    def from_budget(cls, params, tones, budget: OccupancyBudget, kerr=KerrModulation(), **kw):
        return cls(params, tones, kerr, budget.gamma_eff, budget.n_m, **kw)

    def replace(self, **changes) -> "FloquetProblem":
        return replace(self, **changes)

    @property
    def floor(self) -> float:
        """Detected noise floor in quanta (vacuum plus added noise, doubled with an image band)."""
        base = self.params.n_add + 0.5
        return 2 * base if self.heterodyne_image_noise else base

    def describe(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "probe": {"detuning": self.tones.probe.detuning, "g_eff": self.tones.probe.g_eff},
            "thermometry": {"detuning": self.tones.thermometry.detuning,
                            "g_eff": self.tones.thermometry.g_eff},
            "delta": self.tones.delta,
            "kerr": {"k_eff": self.kerr.k_eff, "phase": self.kerr.phase},
            "mech_gamma_eff": self.mech_gamma_eff,
            "mech_occupancy_eff": self.mech_occupancy_eff,
            "heterodyne_image_noise": self.heterodyne_image_noise,
        }


@dataclass(frozen=True)
class LinearSystem:
    drift: np.ndarray      # A, 6x6
    inputs: np.ndarray     # B, 6x10

    def matrix(self, omega) -> np.ndarray:
        """System matrix ``-i w I - A``; batched over an array of ``omega``."""
        omega = np.asarray(omega, dtype=float)
        eye = np.eye(6, dtype=complex)
        return -1j * omega[..., None, None] * eye - self.drift


@dataclass(frozen=True)
class TransferSolution:
    """Transfer amplitudes from the thermometry-band and mechanical inputs to a-1."""

    omega: np.ndarray
    M_minus: np.ndarray
    L_minus: np.ndarray
    M_minus_i: np.ndarray
    L_minus_i: np.ndarray
    Q: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class SidebandWeights:
    """Integrated sideband weights (quanta * rad/s) and their correction factors.

    ``transduction_*`` undo noise squashing and Kerr mixing; ``detuning_*``
    undo the unequal cavity susceptibility at a detuned tone. Multiplying the
    weights by both makes them proportional to ``(n, n + 1)``.
    """

    a_plus: float
    a_minus: float
    transduction_plus: float = 1.0
    transduction_minus: float = 1.0
    detuning_plus: float = 1.0
    detuning_minus: float = 1.0

    def corrected(self):
        return (self.a_plus * self.transduction_plus * self.detuning_plus,
                self.a_minus * self.transduction_minus * self.detuning_minus)

    @property
    def total(self):
        return self.a_plus + self.a_minus

    @property
    def eta(self):
        return (self.a_minus - self.a_plus) / self.a_minus


def assemble_system(problem: FloquetProblem) -> LinearSystem:
    """Drift and input-coupling matrices of the truncated equations of motion."""
    p = problem.params
    k = p.kappa
    d = problem.tones.probe.detuning
    dt = d + problem.tones.delta
    g1 = problem.tones.probe.g_eff
    g2 = problem.tones.thermometry.g_eff
    kc = 0.5 * problem.kerr.k_eff
    ph = np.exp(1j * problem.kerr.phase)
    gm = problem.mech_gamma_eff
    wm = p.omega_m

    A = np.zeros((6, 6), dtype=complex)
    A[A0, A0] = 1j * d - k / 2
    A[A0, AM1] = 1j * ph * kc
    A[A0, B0] = A[A0, B0D] = 1j * g1

    A[A0D, A0D] = -1j * d - k / 2
    A[A0D, AM1D] = -1j * np.conj(ph) * kc
    A[A0D, B0] = A[A0D, B0D] = -1j * g1

    A[B0, B0] = -1j * wm - gm / 2
    A[B0, A0] = A[B0, A0D] = 1j * g1
    A[B0, AM1] = A[B0, AM1D] = 1j * g2

    A[B0D, B0D] = 1j * wm - gm / 2
    A[B0D, A0] = A[B0D, A0D] = -1j * g1
    A[B0D, AM1] = A[B0D, AM1D] = -1j * g2

    # the -i delta a-1 term moved to the right-hand side
    A[AM1, AM1] = 1j * dt - k / 2
    A[AM1, A0] = 1j * np.conj(ph) * kc
    A[AM1, B0] = A[AM1, B0D] = 1j * g2

    A[AM1D, AM1D] = -1j * dt - k / 2
    A[AM1D, A0D] = -1j * ph * kc
    A[AM1D, B0] = A[AM1D, B0D] = -1j * g2

    se, si, sg = math.sqrt(p.kappa_e), math.sqrt(p.kappa_i), math.sqrt(gm)
    B = np.zeros((6, 10))
    B[A0, 0] = B[A0D, 1] = se
    B[A0, 2] = B[A0D, 3] = si
    B[B0, 4] = B[B0D, 5] = sg
    B[AM1, 6] = B[AM1D, 7] = se
    B[AM1, 8] = B[AM1D, 9] = si
    return LinearSystem(A, B)


def solve_full(problem: FloquetProblem, omega, system: LinearSystem = None) -> np.ndarray:
    """Transfer matrix from every input channel to every field, shape ``(..., 6, 10)``."""
    system = assemble_system(problem) if system is None else system
    omega = np.asarray(omega, dtype=float)
    mat = system.matrix(omega)
    rhs = np.broadcast_to(system.inputs.astype(complex), mat.shape[:-2] + system.inputs.shape)
    try:
        out = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError:
        raise SingularSystemError(_first_singular(mat, omega)) from None
    if not np.all(np.isfinite(out)):
        raise SingularSystemError(_first_singular(mat, omega))
    return out


def _thermometry_row(problem, omega, system=None):
    """Row of the resolvent times ``B`` for a-1 only: one transposed solve per frequency."""
    system = assemble_system(problem) if system is None else system
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    mat = system.matrix(omega)
    unit = np.zeros(omega.shape + (6,), dtype=complex)
    unit[..., AM1] = 1.0
    try:
        row = np.linalg.solve(np.swapaxes(mat, -1, -2), unit[..., None])[..., 0]
    except np.linalg.LinAlgError:
        raise SingularSystemError(_first_singular(mat, omega)) from None
    if not np.all(np.isfinite(row)):
        raise SingularSystemError(_first_singular(mat, omega))
    return row @ system.inputs


def _first_singular(mat, omega):
    omega = np.atleast_1d(omega)
    mats = mat.reshape(-1, 6, 6)
    for w, m in zip(omega.ravel(), mats):
        if not np.isfinite(np.linalg.cond(m)) or np.linalg.cond(m) > 1e15:
            return float(w)
    return float(omega.ravel()[0])


def solve_transfer(problem: FloquetProblem, omega, system=None) -> TransferSolution:
    """Transfer amplitudes to a-1 at thermometry-frame frequencies ``omega``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    T = _thermometry_row(problem, omega, system)
    return TransferSolution(omega, T[..., 6], T[..., 7], T[..., 8], T[..., 9], T[..., 4], T[..., 5])


def internal_bath_occupancy(params: SystemParams) -> float:
    """Occupancy of the internal-loss bath that fills the cavity with ``n_c_thermal`` photons."""
    return params.kappa * params.n_c_thermal / params.kappa_i


def _psd_from_transfer(problem, T):
    p = problem.params
    se = math.sqrt(p.kappa_e)
    n_i = internal_bath_occupancy(p)
    n_b = problem.mech_occupancy_eff
    # Normal-ordered output: the annihilation part of each channel is weighted
    # by n, the creation part by n + 1. The external input is vacuum, so its
    # reflected part (sqrt(kappa_e) M - 1) carries no weight.
    normal = (np.abs(se * T[..., 7]) ** 2
              + np.abs(se * T[..., 8]) ** 2 * n_i + np.abs(se * T[..., 9]) ** 2 * (n_i + 1)
              + np.abs(se * T[..., 4]) ** 2 * n_b + np.abs(se * T[..., 5]) ** 2 * (n_b + 1))
    return normal + problem.floor


def thermometry_psd(problem: FloquetProblem, omega, system=None) -> np.ndarray:
    """Output PSD of the thermometry band at thermometry-frame offsets ``omega``."""
    omega = np.asarray(omega, dtype=float)
    T = _thermometry_row(problem, omega.ravel(), system)
    return _psd_from_transfer(problem, T).reshape(omega.shape)


def mechanical_occupancy(problem: FloquetProblem, points=4001, widths=200.0) -> float:
    """Phonon number <b+ b> of the dressed mode, integrated from the b0 spectrum.

    The integrand is resonant at ``+omega_m``; the window of ``widths``
    linewidths is completed with the analytic Lorentzian tail.
    """
    center, width = mechanical_pole(problem)
    if width <= 0:
        raise WindowOverlapError("mechanical resonance is not damped")
    half = min(widths * width, 0.9 * center)
    # sinh spacing: dense at the peak, sparse in the wings
    u = np.sinh(np.linspace(-1.0, 1.0, points) * math.asinh(half / width * 4.0)) / 4.0
    omega = center + width * u
    full = solve_full(problem, omega)
    p = problem.params
    n_i = internal_bath_occupancy(p)
    n_b = problem.mech_occupancy_eff
    # annihilation-type inputs carry <u+ u> = n, creation-type ones <u u+> = n + 1
    weights = np.array([0.0, 1.0, n_i, n_i + 1.0, n_b, n_b + 1.0, 0.0, 1.0, n_i, n_i + 1.0])
    integrand = np.abs(full[:, B0, :]) ** 2 @ weights
    value = np.trapezoid(integrand, omega) / (2 * math.pi)
    inside = 2.0 / math.pi * math.atan(2.0 * half / width)
    return float(value / inside)


def output_spectrum(problem: FloquetProblem, grid) -> Spectrum:
    """Thermometry-band output spectrum on a probe-rotating-frame grid.

    A component at thermometry-frame offset ``w`` appears at ``w + delta`` in
    the probe frame; ``grid`` should stay within ``delta +- 2 omega_m``.
    """
    grid = np.asarray(grid, dtype=float)
    delta = problem.tones.delta
    psd = thermometry_psd(problem, grid - delta)
    meta = {"floor": problem.floor, "params_hash": params_hash(problem.describe()),
            "delta": delta}
    return Spectrum(grid, np.maximum(psd, 0.0), Frame.PROBE_ROTATING, meta)


def mechanical_pole(problem: FloquetProblem):
    """Dressed mechanical resonance ``(center, linewidth)`` in the thermometry frame.

    Taken from the eigenvalue of the drift matrix with the largest ``b0``
    weight; the anti-Stokes peak sits at ``+center`` and the Stokes peak at
    ``-center``.
    """
    A = assemble_system(problem).drift
    vals, vecs = np.linalg.eig(A)
    i = int(np.argmax(np.abs(vecs[B0, :])))
    lam = vals[i]
    return float(-lam.imag), float(-2.0 * lam.real)


def peak_grid(problem: FloquetProblem, points=2001, widths=20.0):
    """Dense probe-frame grids ``(stokes, anti_stokes)`` spanning +-widths linewidths of each peak."""
    center, width = mechanical_pole(problem)
    if width <= 0:
        raise WindowOverlapError("mechanical resonance is not damped")
    delta = problem.tones.delta
    half = widths * width
    offs = np.linspace(-half, half, points)
    return delta - center + offs, delta + center + offs


def default_grid(problem: FloquetProblem, points=4001, span=1.5, peak_points=2001, widths=20.0):
    """Uniform probe-frame grid over ``delta +- span*omega_m`` plus dense blocks at both peaks."""
    delta = problem.tones.delta
    wm = problem.params.omega_m
    coarse = delta + np.linspace(-span * wm, span * wm, points)
    lo, hi = peak_grid(problem, peak_points, widths)
    return np.unique(np.concatenate([coarse, lo, hi]))


def background_problem(problem: FloquetProblem) -> FloquetProblem:
    """Same problem with the mechanics decoupled: floor plus cavity noise only."""
    return problem.replace(tones=problem.tones.with_couplings(0.0, 0.0))


def _window_integral(freq, excess, lo, hi):
    inside = (freq > lo) & (freq < hi)
    x = np.concatenate([[lo], freq[inside], [hi]])
    y = np.concatenate([[np.interp(lo, freq, excess)], excess[inside], [np.interp(hi, freq, excess)]])
    return float(np.trapezoid(y, x))


def sideband_windows(problem: FloquetProblem, half_width=None):
    """Integration windows ``((lo, hi) stokes, (lo, hi) anti_stokes, half_width, linewidth)``."""
    center, width = mechanical_pole(problem)
    if half_width is None:
        half_width = 10.0 * width
    if half_width >= center or width >= center:
        raise WindowOverlapError(
            f"sideband windows overlap: linewidth {width:.3g} vs omega_m {center:.3g}")
    delta = problem.tones.delta
    return ((delta - center - half_width, delta - center + half_width),
            (delta + center - half_width, delta + center + half_width), half_width, width)


def _raw_weights(spectrum: Spectrum, problem: FloquetProblem, half_width=None):
    win_minus, win_plus, half, width = sideband_windows(problem, half_width)
    bg = background_problem(problem)
    weights = []
    for lo, hi in (win_plus, win_minus):
        sel = (spectrum.frequencies >= lo - 1e-9 * abs(lo)) & (spectrum.frequencies <= hi + 1e-9 * abs(hi))
        freq = spectrum.frequencies[sel]
        if freq.size < 3:
            raise ValueError("spectrum does not resolve the sideband window")
        excess = spectrum.psd[sel] - thermometry_psd(bg, freq - problem.tones.delta)
        weights.append(_window_integral(freq, excess, lo, hi))
    # complete the Lorentzian tails cut off by the window
    inside = 2.0 / math.pi * math.atan(2.0 * half / width)
    return weights[0] / inside, weights[1] / inside


def detuning_correction(problem: FloquetProblem):
    """Factors mapping the cavity susceptibility at both sidebands onto the resonant-tone value."""
    k2 = (problem.params.kappa / 2) ** 2
    wm = problem.params.omega_m
    dt = problem.tones.thermometry.detuning
    ref = k2 + wm ** 2
    return (k2 + (wm + dt) ** 2) / ref, (k2 + (dt - wm) ** 2) / ref


def model_weights(problem: FloquetProblem, points=2001, widths=20.0):
    """Raw ``(a_plus, a_minus)`` integrated on dense grids around both peaks."""
    lo, hi = peak_grid(problem, points, widths)
    grid = np.concatenate([lo, hi])
    spec = output_spectrum(problem, grid)
    return _raw_weights(spec, problem)


def ideal_problem(problem: FloquetProblem) -> FloquetProblem:
    return problem.replace(params=problem.params.replace(n_c_thermal=0.0), kerr=KerrModulation())


def transduction_correction(problem: FloquetProblem, points=2001):
    """``(factor_plus, factor_minus)`` = ideal weight / modeled weight.

    The ideal case keeps the occupancy, damping and detunings but removes the
    cavity heating and the Kerr modulation, so both factors are exactly 1 for
    a problem that already has neither.
    """
    ideal = ideal_problem(problem)
    if ideal == problem:
        return 1.0, 1.0
    mp, mm = model_weights(problem, points)
    ip, im = model_weights(ideal, points)
    return ip / mp, im / mm


def sideband_weights(spectrum: Spectrum, problem: FloquetProblem, half_width=None,
                     corrections=True) -> SidebandWeights:
    """Integrate the excess over the modeled background in windows at both sidebands.

    Windows are centred on the dressed mechanical resonance at ``delta +-
    omega_m`` with half-width ten linewidths; the Lorentzian tails outside the
    window are added back analytically.
    """
    a_plus, a_minus = _raw_weights(spectrum, problem, half_width)
    if not corrections:
        return SidebandWeights(a_plus, a_minus)
    tp, tm = transduction_correction(problem)
    dp, dm = detuning_correction(problem)
    return SidebandWeights(a_plus, a_minus, tp, tm, dp, dm)

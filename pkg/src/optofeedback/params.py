"""Physical parameter types shared by every solver.

All frequencies and rates are angular (rad/s). Constructors named ``from_hz``
accept ordinary frequencies and convert at the boundary.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import constants

TWO_PI = 2.0 * math.pi


def hz(value):
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * value


def to_hz(omega):
    """Angular frequency (rad/s) to ordinary frequency (Hz)."""
    return omega / TWO_PI


@dataclass(frozen=True)
class SystemParams:
    """Static device constants.

    Parameters
    ----------
    omega_c, omega_m : float
        Cavity and mechanical angular frequencies.
    gamma : float
        Intrinsic mechanical energy decay rate.
    kappa_i, kappa_e : float
        Internal and external cavity loss rates. The total linewidth is the
        derived property :attr:`kappa`.
    n_m_thermal : float
        Mechanical bath occupancy.
    n_c_thermal : float
        Thermal photon population of the cavity.
    n_add : float
        Added noise of the detection chain referred to the sample plane.
    """

    omega_c: float
    omega_m: float
    gamma: float
    kappa_i: float
    kappa_e: float
    n_m_thermal: float = 0.0
    n_c_thermal: float = 0.0
    n_add: float = 0.0

    @property
    def kappa(self) -> float:
        return self.kappa_i + self.kappa_e

    @classmethod
    def from_hz(cls, f_c, f_m, gamma_hz, kappa_i_hz, kappa_e_hz,
                n_m_thermal=0.0, n_c_thermal=0.0, n_add=0.0) -> "SystemParams":
        return cls(hz(f_c), hz(f_m), hz(gamma_hz), hz(kappa_i_hz), hz(kappa_e_hz),
                   n_m_thermal, n_c_thermal, n_add)

    def to_hz(self) -> dict:
        return {
            "f_c": to_hz(self.omega_c),
            "f_m": to_hz(self.omega_m),
            "gamma_hz": to_hz(self.gamma),
            "kappa_i_hz": to_hz(self.kappa_i),
            "kappa_e_hz": to_hz(self.kappa_e),
            "n_m_thermal": self.n_m_thermal,
            "n_c_thermal": self.n_c_thermal,
            "n_add": self.n_add,
        }

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(self.problems)


def validate(params: SystemParams) -> ValidationReport:
    """Collect every violated invariant of ``params``; an empty report means usable."""
    problems = []
    for name in ("omega_c", "omega_m", "gamma", "kappa_i", "kappa_e"):
        value = getattr(params, name)
        if not np.isfinite(value) or value <= 0:
            problems.append(f"{name} must be a positive rate, got {value!r}")
    for name in ("n_m_thermal", "n_c_thermal", "n_add"):
        value = getattr(params, name)
        if not np.isfinite(value) or value < 0:
            problems.append(f"{name} must be non-negative, got {value!r}")
    if params.omega_m >= params.omega_c:
        problems.append("omega_m must be below omega_c")
    return ValidationReport(tuple(problems))


@dataclass(frozen=True)
class Tone:
    """Coherent drive: detuning from the cavity and effective coupling G = sqrt(n_c) g0."""

    detuning: float
    g_eff: float = 0.0

    def __post_init__(self):
        if self.g_eff < 0:
            raise ValueError(f"g_eff must be non-negative, got {self.g_eff!r}")


@dataclass(frozen=True)
class ToneSet:
    """Probe and thermometry tones.

    ``delta`` is the thermometry-minus-probe spacing. It is derived when not
    given; when given it must equal the detuning difference exactly.
    """

    probe: Tone
    thermometry: Tone
    delta: float = None

    def __post_init__(self):
        derived = self.thermometry.detuning - self.probe.detuning
        if self.delta is None:
            object.__setattr__(self, "delta", derived)
        elif self.delta != derived:
            raise ValueError(
                f"delta={self.delta!r} disagrees with thermometry - probe detuning {derived!r}")

    @classmethod
    def from_spacing(cls, probe_detuning, delta, g_probe, g_thermometry) -> "ToneSet":
        probe = Tone(probe_detuning, g_probe)
        therm = Tone(probe_detuning + delta, g_thermometry)
        return cls(probe, therm)

    def with_couplings(self, g_probe=None, g_thermometry=None) -> "ToneSet":
        probe = self.probe if g_probe is None else Tone(self.probe.detuning, g_probe)
        therm = (self.thermometry if g_thermometry is None
                 else Tone(self.thermometry.detuning, g_thermometry))
        return ToneSet(probe, therm)


@dataclass(frozen=True)
class FeedbackConfig:
    """Feedback loop: amplitude gain, phase shift at the mechanical frequency, filter width."""

    gain_a0: float = 0.0
    phase_phi: float = 0.0
    filter_bandwidth: float = hz(1e3)

    def __post_init__(self):
        if self.gain_a0 < 0:
            raise ValueError(f"gain_a0 must be non-negative, got {self.gain_a0!r}")


@dataclass(frozen=True)
class KerrModulation:
    """Slow cavity-frequency modulation at the tone spacing, amplitude ``k_eff``."""

    k_eff: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.k_eff < 0:
            raise ValueError(f"k_eff must be non-negative (put the sign in phase), got {self.k_eff!r}")


def thermal_occupancy(temperature, omega):
    """Bose occupation 1/(exp(hbar*omega/kB*T) - 1); zero at T = 0."""
    temperature = np.asarray(temperature, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if np.any(temperature < 0):
        raise ValueError("temperature must be non-negative")
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    with np.errstate(divide="ignore", over="ignore"):
        x = constants.hbar * omega / (constants.k * temperature)
        n = 1.0 / np.expm1(x)
    n = np.where(temperature == 0, 0.0, n)
    return float(n) if n.ndim == 0 else n


# Operating point of the membrane device (ordinary frequencies).
DEVICE_HZ = dict(
    f_c=4.554e9,
    f_m=707.2e3,
    gamma_hz=9e-3,
    kappa_i_hz=340e3,
    kappa_e_hz=1.16e6,
)
PROBE_COUPLING_HZ = 6.32e3
PROBE_DETUNING_HZ = -2e3
TONE_SPACING_HZ = -48e3
REFERENCE_COUPLING_HZ = 1.65e3
# Not reported for the feedback runs; chosen weak enough that readout
# backaction stays small next to the feedback damping.
THERMOMETRY_COUPLING_HZ = 0.5e3


def device_params(temperature=20e-3, n_c_thermal=0.42, n_add=2.5) -> SystemParams:
    """Device constants with the mechanical bath at ``temperature`` (kelvin)."""
    f_m = DEVICE_HZ["f_m"]
    n_m = thermal_occupancy(temperature, hz(f_m))
    return SystemParams.from_hz(**DEVICE_HZ, n_m_thermal=n_m,
                                n_c_thermal=n_c_thermal, n_add=n_add)


def device_tones(g_probe_hz=PROBE_COUPLING_HZ, g_thermometry_hz=THERMOMETRY_COUPLING_HZ,
                 probe_detuning_hz=PROBE_DETUNING_HZ, delta_hz=TONE_SPACING_HZ) -> ToneSet:
    return ToneSet.from_spacing(hz(probe_detuning_hz), hz(delta_hz),
                                hz(g_probe_hz), hz(g_thermometry_hz))

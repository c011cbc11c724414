"""Feedback cooling and sideband-asymmetry thermometry of a cavity electromechanical system.

Submodules
----------
params       parameter types, units and device constants
closed_form  damping and occupancy budget of the feedback loop
floquet      two-tone frequency-domain solver with cavity Kerr modulation
timedomain   stochastic simulation of the oscillator and its digital loop
inference    Lorentzian fits and the calibrations built on them
cli          configuration files, experiment runs and comparisons
"""
from .closed_form import (InstabilityError, NonPhysicalAsymmetryError, OccupancyBudget,
                          asymmetry_eta, cavity_noise_psd, gamma_eff, gamma_fb,
                          minimum_occupancy, occupancy_budget, occupancy_from_asymmetry,
                          optimal_phase, sideband_cooling_rate)
from .floquet import (FloquetProblem, SidebandWeights, TransferSolution, assemble_system,
                      output_spectrum, sideband_weights, solve_transfer, transduction_correction)
from .params import (FeedbackConfig, KerrModulation, SystemParams, Tone, ToneSet, device_params,
                     device_tones, hz, thermal_occupancy, to_hz, validate)
from .spectrum import Frame, Spectrum

__version__ = "0.1.0"

__all__ = [
    "FeedbackConfig", "FloquetProblem", "Frame", "InstabilityError", "KerrModulation",
    "NonPhysicalAsymmetryError", "OccupancyBudget", "SidebandWeights", "Spectrum",
    "SystemParams", "Tone", "ToneSet", "TransferSolution", "assemble_system", "asymmetry_eta",
    "cavity_noise_psd", "device_params", "device_tones", "gamma_eff", "gamma_fb", "hz",
    "minimum_occupancy", "occupancy_budget", "occupancy_from_asymmetry", "optimal_phase",
    "output_spectrum", "sideband_cooling_rate", "sideband_weights", "solve_transfer",
    "thermal_occupancy", "to_hz", "transduction_correction", "validate",
]

"""Flat INI configuration: ordinary frequencies in Hz, temperatures in mK.

Every key is declared in :data:`SCHEMA`; unknown sections or keys are an
error so typos never pass silently. Relative data paths are resolved against
the directory of the configuration file.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .params import (DEVICE_HZ, PROBE_COUPLING_HZ, PROBE_DETUNING_HZ, REFERENCE_COUPLING_HZ,
                     THERMOMETRY_COUPLING_HZ, TONE_SPACING_HZ, FeedbackConfig, KerrModulation,
                     SystemParams, Tone, ToneSet, hz, thermal_occupancy, validate)

REQUIRED = object()


def _floats(text):
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _pairs(text):
    """``label:path, label:path`` -> list of (float, str)."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        label, sep, path = item.partition(":")
        if not sep:
            raise ValueError(f"expected value:path, got {item!r}")
        out.append((float(label), path.strip()))
    return out


# section -> key -> (parser, default, help)
SCHEMA = {
    "system": {
        "f_c_hz": (float, REQUIRED, "cavity frequency"),
        "f_m_hz": (float, REQUIRED, "mechanical frequency"),
        "gamma_hz": (float, REQUIRED, "intrinsic mechanical linewidth"),
        "kappa_i_hz": (float, REQUIRED, "internal cavity loss rate"),
        "kappa_e_hz": (float, REQUIRED, "external cavity coupling rate"),
        "temperature_mk": (float, None, "mechanical bath temperature (sets n_m_thermal)"),
        "n_m_thermal": (float, None, "mechanical bath occupancy (overrides temperature_mk)"),
        "n_c_thermal": (float, 0.0, "cavity thermal occupancy"),
        "n_add": (float, 0.0, "added noise quanta at the sample plane"),
    },
    "tones": {
        "probe_detuning_hz": (float, PROBE_DETUNING_HZ, "probe detuning from the cavity"),
        "probe_coupling_hz": (float, PROBE_COUPLING_HZ, "probe effective coupling G_p"),
        "thermometry_coupling_hz": (float, THERMOMETRY_COUPLING_HZ, "thermometry coupling G_t"),
        "delta_hz": (float, TONE_SPACING_HZ, "thermometry minus probe frequency"),
    },
    "feedback": {
        "gain_a0_hz": (float, 0.0, "amplitude gain A0 / 2 pi"),
        "gamma_fb_ratio": (float, None, "alternative to gain_a0_hz: maximal gamma_fb / gamma"),
        "phase_rad": (float, None, "loop phase; default maximises the damping"),
        "filter_bandwidth_hz": (float, 1e3, "loop band-pass width"),
    },
    "kerr": {
        "k_eff_hz": (float, 0.0, "effective Kerr modulation amplitude"),
        "phase_rad": (float, 0.0, "phase of the Kerr modulation"),
    },
    "sweep": {
        "gamma_fb_ratio_min": (float, 1.0, "lowest gamma_fb / gamma"),
        "gamma_fb_ratio_max": (float, 1e5, "highest gamma_fb / gamma"),
        "points": (int, 61, "number of sweep points (log spaced)"),
        "k_eff_hz_list": (_floats, [0.0, 1.2e3], "Kerr amplitudes for asymmetry sweeps"),
    },
    "spectrum": {
        "heterodyne_image_noise": (_bool, False, "double the displayed floor"),
        "span_omega_m": (float, 1.5, "half-span of the uniform grid in units of omega_m"),
        "grid_points": (int, 4001, "points of the uniform grid"),
        "peak_points": (int, 2001, "points of each dense peak block"),
    },
    "simulation": {
        "decay_times": (float, 4000.0, "run length in expected decay times"),
        "steps_per_period": (int, 24, "integration steps per mechanical period"),
        "scale_q": (float, None, "damping scale factor; automatic when absent"),
        "adiabatic_cavity": (_bool, True, "eliminate the cavity adiabatically"),
        "zero_point": (_bool, True, "include vacuum fluctuations"),
        "record_every": (int, None, "decimation of the exported trajectory"),
        "gamma_fb_ratios": (_floats, None, "list of gamma_fb / gamma values to simulate"),
        "phase_offsets_rad": (_floats, None, "offsets from the feedback phase, one run each"),
    },
    "calibration": {
        "detuning_hz": (float, None, "calibration tone detuning (default -f_m or -48 kHz)"),
        "reference_coupling_hz": (float, REFERENCE_COUPLING_HZ, "G_ref for thermometry"),
        "heating_threshold": (float, 0.5, "fraction of the top power where heating may start"),
        "gain_unit_ratio": (float, 500.0, "gamma_fb / gamma at gain label 1 for Kerr fits"),
        "k_max_hz": (float, None, "upper end of the Kerr fit range"),
        "fit_gain_scale": (_bool, True, "fit an overall factor on the gain labels"),
    },
    "synthetic": {
        "enabled": (_bool, False, "generate data instead of reading files"),
        "noise": (float, 0.01, "relative noise on generated spectra"),
        "n_add": (float, 2.5, "added noise used to generate traces"),
        "k_eff_hz": (float, 1.2e3, "Kerr amplitude used to generate asymmetry data"),
        "gain": (float, 1.0, "overall gain applied to generated spectra"),
        "coupling_hz_list": (_floats, None, "couplings of generated traces"),
        "gains": (_floats, [0.2, 0.272, 0.3699, 0.503, 0.684, 0.9302, 1.265, 1.72, 2.339, 3.181,
                            4.326, 5.883, 8.0], "gain labels for Kerr data"),
        "eta_noise": (float, 0.001, "absolute noise on generated asymmetry"),
    },
    "data": {
        "traces": (_pairs, None, "power:path list of added-noise traces"),
        "sweep": (_pairs, None, "coupling_hz:path list of thermometry traces"),
        "asymmetry_curve": (str, None, "CSV with columns gain, eta"),
        "spectrum": (str, None, "spectrum CSV or JSON to fit"),
    },
}


class ConfigError(ValueError):
    """Problem with a configuration file; the message names the line or key."""


@dataclass
class Config:
    """Parsed and typed configuration."""

    values: dict
    path: Path = None
    base_dir: Path = field(default_factory=Path.cwd)

    def get(self, section, key):
        return self.values[section][key]

    def resolve(self, path) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    # -- physical objects ------------------------------------------------

    def system(self) -> SystemParams:
        s = self.values["system"]
        f_m = s["f_m_hz"]
        if s["n_m_thermal"] is not None:
            n_m = s["n_m_thermal"]
        elif s["temperature_mk"] is not None:
            n_m = thermal_occupancy(s["temperature_mk"] * 1e-3, hz(f_m))
        else:
            n_m = 0.0
        params = SystemParams.from_hz(s["f_c_hz"], f_m, s["gamma_hz"], s["kappa_i_hz"],
                                      s["kappa_e_hz"], n_m, s["n_c_thermal"], s["n_add"])
        report = validate(params)
        if not report.ok:
            raise ConfigError(f"[system] {report}")
        return params

    def tones(self) -> ToneSet:
        t = self.values["tones"]
        probe = Tone(hz(t["probe_detuning_hz"]), hz(t["probe_coupling_hz"]))
        therm = Tone(probe.detuning + hz(t["delta_hz"]), hz(t["thermometry_coupling_hz"]))
        return ToneSet(probe, therm)

    def feedback(self, params=None, tones=None) -> FeedbackConfig:
        from .closed_form import gain_for_damping, optimal_phase

        f = self.values["feedback"]
        params = params or self.system()
        tones = tones or self.tones()
        phase = optimal_phase(params) if f["phase_rad"] is None else f["phase_rad"]
        if f["gamma_fb_ratio"] is not None:
            a0 = gain_for_damping(params, tones.probe, f["gamma_fb_ratio"] * params.gamma)
        else:
            a0 = hz(f["gain_a0_hz"])
        return FeedbackConfig(a0, phase, hz(f["filter_bandwidth_hz"]))

    def kerr(self) -> KerrModulation:
        k = self.values["kerr"]
        return KerrModulation(hz(k["k_eff_hz"]), k["phase_rad"])

    def resolved(self) -> dict:
        """Every value after defaults, for the manifest."""
        return {sec: {k: v for k, v in keys.items()} for sec, keys in self.values.items()}


def _key_lines(text):
    """Map (section, key) to the line it is defined on."""
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
        elif line and not line.startswith(("#", ";")) and ("=" in line or ":" in line):
            key = line.split("=", 1)[0].split(":", 1)[0].strip().lower()
            lines[(section, key)] = no
    return lines


def required_keys():
    return [f"{sec}.{key}" for sec, keys in SCHEMA.items()
            for key, (_, default, _) in keys.items() if default is REQUIRED]


def parse_config(text, path=None) -> Config:
    """Parse INI text against :data:`SCHEMA`."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse configuration: {exc}") from None
    lines = _key_lines(text)
    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]; known: {', '.join(SCHEMA)}")
    missing = []
    for section, keys in SCHEMA.items():
        given = parser[section] if parser.has_section(section) else {}
        for key in given:
            if key not in keys:
                no = lines.get((section, key))
                where = f" (line {no})" if no else ""
                raise ConfigError(f"unknown key '{key}' in [{section}]{where}; "
                                  f"known: {', '.join(keys)}")
        out = {}
        for key, (conv, default, _) in keys.items():
            if key in given:
                try:
                    value = conv(given[key])
                except ValueError as exc:
                    no = lines.get((section, key))
                    raise ConfigError(f"[{section}] {key} (line {no}): {exc}") from None
                if isinstance(value, float) and not math.isfinite(value):
                    raise ConfigError(f"[{section}] {key}: value must be finite")
                out[key] = value
            elif default is REQUIRED:
                missing.append(f"{section}.{key}")
            else:
                out[key] = list(default) if isinstance(default, list) else default
        values[section] = out
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))
    base = Path(path).resolve().parent if path else Path.cwd()
    return Config(values, Path(path) if path else None, base)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, path)


def device_config_text(temperature_mk=20.0, n_c_thermal=0.42, n_add=2.5) -> str:
    """Configuration text for the reference device operating point."""
    d = DEVICE_HZ
    return (
        "[system]\n"
        f"f_c_hz = {d['f_c']!r}\nf_m_hz = {d['f_m']!r}\ngamma_hz = {d['gamma_hz']!r}\n"
        f"kappa_i_hz = {d['kappa_i_hz']!r}\nkappa_e_hz = {d['kappa_e_hz']!r}\n"
        f"temperature_mk = {temperature_mk!r}\nn_c_thermal = {n_c_thermal!r}\nn_add = {n_add!r}\n"
    )

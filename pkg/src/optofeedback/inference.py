"""Peak fitting and the inversions from spectra back to physical quantities."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .closed_form import (InstabilityError, NonPhysicalAsymmetryError, occupancy_budget,
                          optimal_phase)
from .floquet import (FloquetProblem, SingularSystemError, WindowOverlapError,
                      mechanical_occupancy, mechanical_pole, model_weights, output_spectrum,
                      peak_grid)
from .params import FeedbackConfig, KerrModulation, SystemParams, Tone, ToneSet
from .spectrum import Spectrum, _jsonable


class FitError(RuntimeError):
    """The optimiser did not converge; ``residual`` holds the final cost."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateWindowError(ValueError):
    """The fit window holds no peak or dip to fit."""


class IdentifiabilityError(RuntimeError):
    """The data do not constrain the requested parameter."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ModelMismatchError(RuntimeError):
    """Residuals are inconsistent with the forward model."""

    def __init__(self, message, max_sigma=None):
        super().__init__(message)
        self.max_sigma = max_sigma


# ---------------------------------------------------------------- Lorentzian

def lorentzian(omega, center, fwhm, height, baseline):
    u = 2.0 * (np.asarray(omega, dtype=float) - center) / fwhm
    return baseline + height / (1.0 + u * u)


@dataclass(frozen=True)
class LorentzianFit:
    """Baseline plus Lorentzian. ``area`` is the analytic integral (pi/2) height fwhm."""

    center: float
    fwhm: float
    height: float
    baseline: float
    stderr: dict
    covariance: np.ndarray = field(repr=False, default=None)
    residual: float = 0.0
    nfev: int = 0

    @property
    def area(self) -> float:
        return 0.5 * math.pi * self.height * self.fwhm

    @property
    def area_stderr(self) -> float:
        if self.covariance is None:
            return float("nan")
        grad = 0.5 * math.pi * np.array([0.0, self.height, self.fwhm, 0.0])
        return float(math.sqrt(max(grad @ self.covariance @ grad, 0.0)))

    def __call__(self, omega):
        return lorentzian(omega, self.center, self.fwhm, self.height, self.baseline)

    def to_dict(self) -> dict:
        return {"center": self.center, "fwhm": self.fwhm, "height": self.height,
                "baseline": self.baseline, "area": self.area, "area_stderr": self.area_stderr,
                "stderr": dict(self.stderr), "residual": self.residual, "nfev": self.nfev}


def _initial_guess(freq, psd):
    edge = max(3, freq.size // 20)
    baseline = float(np.median(np.concatenate([psd[:edge], psd[-edge:]])))
    dev = psd - baseline
    i = int(np.argmax(np.abs(dev)))
    scale = float(np.max(np.abs(psd))) or 1.0
    if np.ptp(psd) <= 1e-12 * scale or i in (0, freq.size - 1):
        raise DegenerateWindowError("no local extremum inside the fit window")
    height = float(dev[i])
    half = np.abs(dev) >= 0.5 * abs(height)
    # contiguous run of above-half-maximum points around the extremum
    lo = i
    while lo > 0 and half[lo - 1]:
        lo -= 1
    hi = i
    while hi < freq.size - 1 and half[hi + 1]:
        hi += 1
    fwhm = float(freq[hi] - freq[lo])
    if fwhm <= 0:
        fwhm = float(freq[min(i + 1, freq.size - 1)] - freq[max(i - 1, 0)])
    return np.array([freq[i], fwhm, height, baseline])


def fit_lorentzian(spectrum: Spectrum, window=None, init=None, relative=False,
                   max_iterations=200) -> LorentzianFit:
    """Least-squares fit of ``baseline + height / (1 + (2 (w - center) / fwhm)^2)``.

    Parameters
    ----------
    spectrum : Spectrum
    window : (lo, hi), optional
        Angular-frequency range to fit; the whole spectrum when omitted.
    init : sequence, optional
        ``(center, fwhm, height, baseline)``. Taken from the extremum and its
        half-maximum crossings when omitted.
    relative : bool
        Weight residuals by the model value. Appropriate for averaged
        periodograms whose scatter is proportional to the level.
    """
    spec = spectrum if window is None else spectrum.window(*window)
    freq, psd = spec.frequencies, spec.psd
    if freq.size < 5:
        raise DegenerateWindowError(f"only {freq.size} points in the fit window")
    p0 = _initial_guess(freq, psd) if init is None else np.asarray(init, dtype=float)
    # work in scaled coordinates so all four unknowns are of order one
    w0, s0 = p0[0], abs(p0[1])
    y0 = max(abs(p0[2]), abs(p0[3]), 1e-300)
    x = (freq - w0) / s0
    y = psd / y0

    def model(q):
        return q[3] + q[2] / (1.0 + (2.0 * (x - q[0]) / q[1]) ** 2)

    if relative:
        def resid(q):
            m = model(q)
            return y / m - 1.0
    else:
        def resid(q):
            return model(q) - y

    q0 = np.array([0.0, 1.0, p0[2] / y0, p0[3] / y0])
    n_par = q0.size
    res = least_squares(resid, q0, method="lm", xtol=1e-10, ftol=1e-15, gtol=1e-15,
                        max_nfev=max_iterations * (n_par + 1))
    if res.status == 0:
        raise FitError(f"Lorentzian fit did not converge in {max_iterations} iterations",
                       residual=float(2 * res.cost))
    q = res.x
    fwhm = abs(q[1])
    if not fwhm > 0:
        raise FitError("Lorentzian fit collapsed to zero width", residual=float(2 * res.cost))
    dof = max(freq.size - n_par, 1)
    s2 = 2 * res.cost / dof
    J = res.jac
    try:
        cov_q = np.linalg.inv(J.T @ J) * s2
    except np.linalg.LinAlgError:
        cov_q = np.full((n_par, n_par), np.inf)
    scale = np.array([s0, s0, y0, y0])
    cov = cov_q * np.outer(scale, scale)
    err = np.sqrt(np.abs(np.diag(cov)))
    names = ("center", "fwhm", "height", "baseline")
    fit = LorentzianFit(w0 + s0 * q[0], s0 * fwhm, y0 * q[2], y0 * q[3],
                        dict(zip(names, map(float, err))), cov, float(2 * res.cost), int(res.nfev))
    inside = np.count_nonzero(np.abs(freq - fit.center) <= 0.5 * fit.fwhm)
    if inside < 15:
        warnings.warn(f"only {inside} points across the fitted FWHM; refine the grid",
                      RuntimeWarning, stacklevel=2)
    return fit


# ------------------------------------------------------------------ occupancy

@dataclass(frozen=True)
class OccupancyEstimate:
    n: float
    stderr: float
    a_plus: float
    a_minus: float


def extract_occupancy(fit_plus, fit_minus, corrections=(1.0, 1.0)) -> OccupancyEstimate:
    """Occupancy from two sideband fits after multiplying their areas by ``corrections``.

    ``fit_plus`` and ``fit_minus`` may be :class:`LorentzianFit` objects or
    plain ``(area, stderr)`` pairs. Errors are propagated to first order.
    """
    a, sa = _area(fit_plus)
    b, sb = _area(fit_minus)
    cp, cm = corrections
    a, sa, b, sb = a * cp, sa * cp, b * cm, sb * cm
    if a < 0 or not b > a:
        raise NonPhysicalAsymmetryError(
            f"corrected Stokes area {b!r} must exceed anti-Stokes area {a!r} >= 0")
    d = b - a
    n = a / d
    err = math.hypot(b / d ** 2 * sa, a / d ** 2 * sb)
    return OccupancyEstimate(n, err, a, b)


def _area(obj):
    if isinstance(obj, LorentzianFit):
        return obj.area, obj.area_stderr
    area, err = obj
    return float(area), float(err)


# ------------------------------------------------------------ added noise

@dataclass(frozen=True)
class CalibrationResult:
    """Collective added-noise fit.

    ``g_shared`` is the coupling at unit power label (rad/s); the coupling of a
    trace at power ``P`` is ``g_shared * sqrt(P)``.
    """

    n_add_fit: float
    n_add_stderr: float
    g_shared: float
    g_shared_stderr: float
    gain: float
    heating_slope: float
    residuals: tuple
    chi2: float

    def to_json(self, path=None) -> str:
        return _dump(asdict(self), path)


def _dump(doc, path):
    text = json.dumps(_jsonable(doc), indent=1)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def calibration_problem(params: SystemParams, g, detuning, n_bath, image=False) -> FloquetProblem:
    """Single-tone sideband-cooling problem used as the calibration forward model."""
    tones = ToneSet(Tone(0.0, 0.0), Tone(detuning, g))
    return FloquetProblem(params, tones, mech_occupancy_eff=n_bath, heterodyne_image_noise=image)


def calibration_grid(params: SystemParams, g, detuning, points=401, widths=8.0):
    """Probe-frame grid around the anti-Stokes peak of a calibration trace."""
    problem = calibration_problem(params, g, detuning, params.n_m_thermal)
    _, hi = peak_grid(problem, points, widths)
    return hi


def _heating(power, p_max, threshold, slope):
    ref = threshold * p_max
    return 1.0 + slope * np.maximum(power / ref - 1.0, 0.0)


def calibrate_n_add(traces, params: SystemParams, n_m_thermal=None, detuning=None,
                    heating_threshold=0.5, strict=True, max_rel_error=0.5, min_traces=4,
                    min_span_db=10.0) -> CalibrationResult:
    """Collective fit of a family of sideband-cooling traces for the added noise.

    Parameters
    ----------
    traces : sequence of (power, Spectrum)
        Anti-Stokes region of each trace in probe-frame frequencies, in any
        linear unit (one overall gain is fitted).
    params : SystemParams
        Device constants; ``n_add`` in it is ignored.
    n_m_thermal : float, optional
        Mechanical bath occupancy at low power. Defaults to ``params.n_m_thermal``.
    detuning : float, optional
        Drive detuning. Defaults to ``-omega_m``.
    heating_threshold : float
        Fraction of the largest power above which the bath occupancy may rise
        linearly with power.
    strict : bool
        Raise :class:`IdentifiabilityError` when the family is shorter than
        ``min_traces`` or spans less than ``min_span_db``, or when the relative
        standard error of ``n_add`` exceeds ``max_rel_error``; otherwise warn.

    Notes
    -----
    Floats ``n_add``, the coupling per square-root power, the overall gain and
    a heating slope (only when some trace lies above the threshold). The
    coupling of each trace is tied to the shared scale so that traces at low
    power, whose linewidth hardly exceeds the intrinsic one, still pin
    ``n_add`` through the ratio of peak height to floor.
    """
    traces = sorted(((float(p), s) for p, s in traces), key=lambda t: t[0])
    if not traces:
        raise ValueError("no traces given")
    powers = np.array([p for p, _ in traces])
    if np.any(powers <= 0):
        raise ValueError("trace powers must be positive")
    span_db = 10 * math.log10(powers.max() / powers.min())
    if len(traces) < min_traces or span_db < min_span_db:
        # a short family cannot tell technical heating from the coupling scale
        msg = (f"{len(traces)} traces spanning {span_db:.1f} dB do not identify n_add; "
               f"need >= {min_traces} traces over >= {min_span_db:g} dB")
        if strict:
            raise IdentifiabilityError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    n_base = params.n_m_thermal if n_m_thermal is None else n_m_thermal
    detuning = -params.omega_m if detuning is None else detuning
    p_max = powers.max()
    heated = powers > heating_threshold * p_max
    use_heating = bool(np.any(heated)) and len(traces) > 1

    # initial values: floor from the spectrum edges, coupling from the widest peak
    floor0 = float(np.median([np.median(np.concatenate([s.psd[:5], s.psd[-5:]]))
                              for _, s in traces]))
    p_top, s_top = traces[-1]
    fwhm_top = _initial_guess(s_top.frequencies, s_top.psd)[1]
    g_top = _coupling_from_width(params, detuning, fwhm_top)
    g0 = max(g_top, 1e-6 * params.kappa) / math.sqrt(p_top)
    n_add0 = 2.0
    gain0 = floor0 / (n_add0 + 0.5)

    def unpack(q):
        n_add = q[0]
        g = math.exp(q[1])
        gain = math.exp(q[2])
        slope = q[3] if use_heating else 0.0
        return n_add, g, gain, slope

    def resid(q):
        n_add, g, gain, slope = unpack(q)
        p = params.replace(n_add=max(n_add, 0.0))
        heat = _heating(powers, p_max, heating_threshold, slope)
        out = []
        for (power, spec), h in zip(traces, heat):
            problem = calibration_problem(p, g * math.sqrt(power), detuning, max(n_base * h, 0.0))
            try:
                model = gain * output_spectrum(problem, spec.frequencies).psd
            except (SingularSystemError, ValueError):
                model = np.full(spec.psd.shape, 1e300)
            out.append(spec.psd / model - 1.0)
        return np.concatenate(out)

    q0 = [n_add0, math.log(g0), math.log(gain0)] + ([0.0] if use_heating else [])
    res = least_squares(resid, q0, method="lm", xtol=1e-12, ftol=1e-12, max_nfev=2000)
    n_add, g, gain, slope = unpack(res.x)
    r = res.fun
    dof = max(r.size - len(q0), 1)
    s2 = 2 * res.cost / dof
    J = res.jac
    try:
        _, sing, vt = np.linalg.svd(J, full_matrices=False)
    except np.linalg.LinAlgError:
        sing, vt = np.zeros(len(q0)), np.eye(len(q0))
    keep = sing > 1e-12 * sing[0] if sing[0] > 0 else np.zeros(len(q0), bool)
    cov = (vt[keep].T / sing[keep] ** 2) @ vt[keep] * s2
    err = np.sqrt(np.abs(np.diag(cov)))
    # a parameter touched by an unresolved direction has no finite error
    null = np.abs(vt[~keep]).max(axis=0) if np.any(~keep) else np.zeros(len(q0))
    err = np.where(null > 1e-6, np.inf, err)
    n_err = float(err[0])
    g_err = float(err[1] * g)
    splits = np.cumsum([s.psd.size for _, s in traces])[:-1]
    per_trace = tuple(float(np.sqrt(np.mean(part ** 2))) for part in np.split(r, splits))
    result = CalibrationResult(float(n_add), n_err, float(g), g_err, float(gain), float(slope),
                               per_trace, float(2 * res.cost))
    if not n_err <= max_rel_error * abs(n_add):
        msg = (f"n_add is not identified by these traces: {n_add:.4g} +- {n_err:.3g}; "
               "add traces at higher power")
        if strict:
            raise IdentifiabilityError(msg, result)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return result


def _coupling_from_width(params, detuning, width):
    """Coupling whose single-tone optical damping adds ``width - gamma`` to the linewidth."""
    k, wm = params.kappa, params.omega_m
    hk2 = (k / 2) ** 2
    per_g2 = k * (1.0 / (hk2 + (detuning + wm) ** 2) - 1.0 / (hk2 + (detuning - wm) ** 2))
    extra = max(width - params.gamma, 0.0)
    if per_g2 <= 0 or extra == 0:
        return 0.0
    return math.sqrt(extra / per_g2)


def n_add_from_floor(spectrum: Spectrum, gain=1.0, heterodyne_image_noise=False):
    """Added noise from a trace without mechanical features: ``(value, stderr)``."""
    level = spectrum.psd / gain
    if heterodyne_image_noise:
        level = level / 2.0
    values = level - 0.5
    n = values.size
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")


# ---------------------------------------------------------------- thermometry

@dataclass(frozen=True)
class ThermometryCalibration:
    """Conversion from anti-Stokes peak area at ``g_ref`` to phonon number."""

    c_ref: float
    c_ref_stderr: float
    g_ref: float
    n_ref: float
    a_ref: float
    gain: float
    residuals_sigma: tuple

    def occupancy(self, area) -> float:
        return self.c_ref * area

    def to_json(self, path=None) -> str:
        return _dump(asdict(self), path)


def thermometry_tones(params: SystemParams, g, detuning) -> ToneSet:
    return ToneSet(Tone(0.0, 0.0), Tone(detuning, g))


def model_peak_area(params: SystemParams, g, detuning, n_bath=None, points=801, widths=8.0):
    """Fitted anti-Stokes Lorentzian area (quanta rad/s) of the single-tone model."""
    n_bath = params.n_m_thermal if n_bath is None else n_bath
    problem = FloquetProblem(params, thermometry_tones(params, g, detuning), mech_occupancy_eff=n_bath)
    center, width = mechanical_pole(problem)
    if width <= 0:
        raise InstabilityError(width)
    _, grid = peak_grid(problem, points, widths)
    spec = output_spectrum(problem, grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return fit_lorentzian(spec).area


def _occupancy_under_cooling(params, g, detuning, n_bath):
    """Phonon number of the single-tone sideband-cooled mode, including optical backaction."""
    problem = FloquetProblem(params, thermometry_tones(params, g, detuning), mech_occupancy_eff=n_bath)
    return mechanical_occupancy(problem)


def calibrate_thermometry(sweep, params: SystemParams, n_m_thermal=None, detuning=None,
                          g_ref=None, max_sigma=5.0, points=801) -> ThermometryCalibration:
    """Fit measured anti-Stokes areas versus thermometry coupling.

    Parameters
    ----------
    sweep : sequence of (g_t, Spectrum)
        Thermometry-only traces around the anti-Stokes peak, any linear unit.
    detuning : float, optional
        Thermometry detuning from the cavity; defaults to -48 kHz (angular).
    g_ref : float, optional
        Coupling at which ``c_ref`` is quoted; defaults to 2 pi 1.65 kHz.

    Raises
    ------
    ModelMismatchError
        When a fitted area deviates from the scaled model by more than
        ``max_sigma`` standard errors, or the model is unstable for the sweep.
    """
    from .params import REFERENCE_COUPLING_HZ, TONE_SPACING_HZ, hz

    n_base = params.n_m_thermal if n_m_thermal is None else n_m_thermal
    detuning = hz(TONE_SPACING_HZ) if detuning is None else detuning
    g_ref = hz(REFERENCE_COUPLING_HZ) if g_ref is None else g_ref
    g_values, areas, errs = [], [], []
    for g, spec in sweep:
        fit = fit_lorentzian(spec)
        g_values.append(float(g))
        areas.append(fit.area)
        errs.append(fit.area_stderr)
    areas, errs = np.array(areas), np.array(errs)
    try:
        model = np.array([model_peak_area(params, g, detuning, n_base, points) for g in g_values])
        model_ref = model_peak_area(params, g_ref, detuning, n_base, points)
        n_ref = _occupancy_under_cooling(params, g_ref, detuning, n_base)
    except (InstabilityError, WindowOverlapError, SingularSystemError) as exc:
        raise ModelMismatchError(f"forward model unusable for this sweep: {exc}") from exc
    # guard against zero reported errors on noiseless data
    sig = np.maximum(errs, 1e-9 * np.abs(areas))
    w = 1.0 / sig ** 2
    gain = float(np.sum(w * areas * model) / np.sum(w * model * model))
    gain_err = float(1.0 / math.sqrt(np.sum(w * model * model)))
    pulls = (areas - gain * model) / sig
    worst = float(np.max(np.abs(pulls)))
    if worst > max_sigma:
        raise ModelMismatchError(
            f"thermometry sweep deviates from the sideband-cooling model by {worst:.1f} sigma",
            max_sigma=worst)
    a_ref = gain * model_ref
    c_ref = n_ref / a_ref
    return ThermometryCalibration(float(c_ref), float(c_ref * gain_err / gain), float(g_ref),
                                  float(n_ref), float(a_ref), gain, tuple(map(float, pulls)))


# ----------------------------------------------------------------------- Kerr

@dataclass(frozen=True)
class KerrTemplate:
    """Operating point for the asymmetry-versus-gain forward model.

    ``gain`` labels are converted to feedback amplitude as ``A0 = gain_unit *
    gain``; the fit may rescale ``gain_unit``.
    """

    params: SystemParams
    tones: ToneSet
    gain_unit: float
    phase_phi: float = None
    kerr_phase: float = 0.0
    points: int = 1001

    def problem(self, gain, k_eff, gain_scale=1.0) -> FloquetProblem:
        phase = optimal_phase(self.params) if self.phase_phi is None else self.phase_phi
        fb = FeedbackConfig(self.gain_unit * gain_scale * gain, phase)
        budget = occupancy_budget(self.params, self.tones.probe, fb)
        return FloquetProblem.from_budget(self.params, self.tones, budget,
                                          KerrModulation(k_eff, self.kerr_phase))

    def eta(self, gain, k_eff, gain_scale=1.0) -> float:
        a_plus, a_minus = model_weights(self.problem(gain, k_eff, gain_scale), self.points)
        return (a_minus - a_plus) / a_minus

    def curve(self, gains, k_eff, gain_scale=1.0) -> np.ndarray:
        return np.array([self.eta(g, k_eff, gain_scale) for g in gains])


@dataclass(frozen=True)
class KerrFit:
    k_eff: float
    stderr: float
    gain_scale: float
    gain_scale_stderr: float
    chi2: float
    scan_k: tuple = ()
    scan_chi2: tuple = ()

    def to_json(self, path=None) -> str:
        return _dump(asdict(self), path)


def fit_kerr(curve, template: KerrTemplate, k_max=None, fit_gain_scale=True,
             eta_sigma=0.01, scan_points=21) -> KerrFit:
    """Fit the effective Kerr amplitude to measured asymmetry versus feedback gain.

    Parameters
    ----------
    curve : sequence of (gain, eta)
        Raw (uncorrected) asymmetry at each gain label.
    template : KerrTemplate
        Forward model with every other parameter calibrated.
    k_max : float, optional
        Upper end of the Kerr range, default ``0.2 omega_m``.
    fit_gain_scale : bool
        Also fit one overall factor on the gain labels.

    Notes
    -----
    Residuals are divided by ``eta_sigma * (1 + gain / median(gain))`` so the
    low-gain points dominate. A coarse scan of ``k_eff`` seeds a bounded
    least-squares refinement; the scan also detects a flat misfit.
    """
    gains = np.array([g for g, _ in curve], dtype=float)
    etas = np.array([e for _, e in curve], dtype=float)
    if gains.size < 2:
        raise ValueError("need at least two points on the asymmetry curve")
    k_max = 0.2 * template.params.omega_m if k_max is None else k_max
    weight = 1.0 / (eta_sigma * (1.0 + gains / np.median(gains)))

    def resid(q):
        # q = (k_eff / k_max, log gain scale)
        s = math.exp(q[1]) if fit_gain_scale else 1.0
        try:
            model = template.curve(gains, q[0] * k_max, s)
        except (InstabilityError, WindowOverlapError, SingularSystemError):
            return np.full(gains.size, 1e6)
        return (model - etas) * weight

    # quadratic spacing resolves small Kerr amplitudes without a long scan
    scan = np.linspace(0.0, 1.0, scan_points) ** 2
    chi = np.array([np.sum(resid([u, 0.0]) ** 2) for u in scan])
    # chi2 is in units of eta_sigma^2: a spread below one cannot single out any amplitude
    if not np.isfinite(chi).any() or np.ptp(chi[np.isfinite(chi)]) < 1.0:
        raise IdentifiabilityError("asymmetry misfit is flat over the scanned Kerr range")
    u0 = min(max(float(scan[int(np.argmin(chi))]), 1e-3), 1.0 - 1e-3)
    if fit_gain_scale:
        q0, lo, hi = [u0, 0.0], [0.0, -2.0], [1.0, 2.0]
    else:
        q0, lo, hi = [u0], [0.0], [1.0]
        inner = resid
        resid = lambda q: inner([q[0], 0.0])  # noqa: E731
    res = least_squares(resid, q0, bounds=(lo, hi), method="trf", xtol=1e-10,
                        diff_step=1e-4, max_nfev=200)
    J = res.jac
    dof = max(gains.size - J.shape[1], 1)
    s2 = 2 * res.cost / dof
    try:
        cov = np.linalg.inv(J.T @ J) * s2
        err = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        err = np.full(J.shape[1], np.inf)
    s = math.exp(res.x[1]) if fit_gain_scale else 1.0
    s_err = float(err[1] * s) if fit_gain_scale else 0.0
    return KerrFit(float(res.x[0] * k_max), float(err[0] * k_max), s, s_err, float(2 * res.cost),
                   tuple(map(float, scan * k_max)), tuple(map(float, chi)))

"""Stochastic time-domain model of the feedback-cooled oscillator.

The mechanical quadratures ``x = (b + b+)/sqrt2`` and ``p = -i(b - b+)/sqrt2``
obey::

    dx = ( w_m p - g/2 x) dt + dW_x
    dp = (-w_m x - g/2 p + F) dt + dW_p + dW_ba

so that ``(<x^2> + <p^2>)/2`` is the occupancy plus one half. The detected
signal is the cavity-filtered position plus white imprecision noise. It runs
through a digital chain (resonant band-pass, fractional delay, gain) and
returns as a force ``F`` on ``p``, held constant over each step.

Each step advances the deterministic part exactly (matrix exponential);
noise increments are drawn on a fixed fine grid and summed per step, so runs
with different ``dt`` but the same noise grid see the same Wiener path.

Quality-factor scaling maps ``gamma -> s gamma``, ``G -> sqrt(s) G`` and
``A0 -> sqrt(s) A0``. This keeps ``gamma_fb/gamma`` and every occupancy
term fixed while bringing the linewidth to a simulable value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import fft, signal
from scipy.linalg import expm
from scipy.optimize import brentq

from . import closed_form
from .params import FeedbackConfig, SystemParams, ToneSet
from .spectrum import Frame, Spectrum

# simulated linewidth relative to omega_m chosen by the automatic scaling
LINEWIDTH_FRACTION = 1.0 / 500.0
STEPS_PER_PERIOD = 24
# loop band-pass width in expected linewidths (the physical 1 kHz is far narrower
# than a scaled linewidth)
FILTER_LINEWIDTHS = 250.0
NOISE_CHANNELS = 4  # thermal x, thermal p, backaction p, imprecision


class LengthError(ValueError):
    """Record too short for the requested spectral estimate."""


@dataclass(frozen=True)
class SimConfig:
    """Integration settings, all in simulated (scaled) units.

    Parameters
    ----------
    dt, duration : float
        Step and total length in seconds.
    seed : int
        Seed of the noise generator.
    scale_q : float, optional
        Damping scale factor ``s``. ``None`` lets :func:`simulate` choose it
        so the expected linewidth is ``omega_m / 500``.
    adiabatic_cavity : bool
        Cavity response applied as a fixed gain and phase at ``omega_m``. When
        False the cavity quadrature is integrated as a low-pass filter.
    zero_point : bool
        Include vacuum fluctuations; False gives the classical limit.
    noise_dt : float, optional
        Resolution of the noise grid; ``dt`` must be an integer multiple.
    burn_in : float, optional
        Discarded initial interval; defaults to 20 expected decay times.
    segment : float, optional
        Welch segment length in seconds; defaults to 100 expected decay times.
    record_every : int, optional
        Decimation of the stored trajectory.
    """

    dt: float
    duration: float
    seed: int = 0
    scale_q: float = None
    adiabatic_cavity: bool = True
    zero_point: bool = True
    noise_dt: float = None
    burn_in: float = None
    segment: float = None
    record_every: int = None

    def __post_init__(self):
        if not (self.dt > 0 and self.duration > 0):
            raise ValueError("dt and duration must be positive")
        if self.noise_dt is not None:
            ratio = self.dt / self.noise_dt
            if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-6:
                raise ValueError("dt must be an integer multiple of noise_dt")

    @property
    def substeps(self) -> int:
        return 1 if self.noise_dt is None else int(round(self.dt / self.noise_dt))

    @classmethod
    def auto(cls, params: SystemParams, tones: ToneSet, fb: FeedbackConfig, seed=0,
             decay_times=4000.0, steps_per_period=STEPS_PER_PERIOD, **kw) -> "SimConfig":
        """Settings whose length is ``decay_times`` expected 1/gamma_eff after scaling."""
        scale = kw.pop("scale_q", None) or auto_scale(params, tones, fb)
        g = abs(closed_form.gamma_eff(params, tones.probe, fb).gamma_eff) * scale
        dt = 2 * math.pi / (steps_per_period * params.omega_m)
        burn = kw.pop("burn_in", None) or 20.0 / g
        return cls(dt=dt, duration=burn + decay_times / g, seed=seed, scale_q=scale,
                   burn_in=burn, **kw)


def auto_scale(params: SystemParams, tones: ToneSet, fb: FeedbackConfig) -> float:
    g = abs(closed_form.gamma_eff(params, tones.probe, fb).gamma_eff)
    return LINEWIDTH_FRACTION * params.omega_m / g


@dataclass(frozen=True)
class ScaledModel:
    """Rates entering the integrator after quality-factor scaling."""

    omega_m: float
    gamma: float
    kappa: float
    kappa_e: float
    g_probe: float
    gain_a0: float
    phase_phi: float
    n_m: float
    n_c: float
    n_add: float
    scale: float

    @classmethod
    def build(cls, params, tones, fb, scale):
        r = math.sqrt(scale)
        return cls(params.omega_m, params.gamma * scale, params.kappa, params.kappa_e,
                   tones.probe.g_eff * r, fb.gain_a0 * r, fb.phase_phi, params.n_m_thermal,
                   params.n_c_thermal, params.n_add, scale)

    @property
    def cavity_phase(self):
        return math.atan2(2 * self.omega_m, self.kappa)

    @property
    def transduction(self):
        """Signal amplitude per unit position at omega_m."""
        return math.sqrt(self.kappa_e) * 4 * self.g_probe / math.hypot(self.kappa, 2 * self.omega_m)

    def imprecision(self, zero_point=True):
        k, ke, w = self.kappa, self.kappa_e, self.omega_m
        half = 0.5 if zero_point else 0.0
        return self.n_add + half + 8 * k * ke / (k * k + 4 * w * w) * self.n_c

    def backaction(self, zero_point=True):
        k, w = self.kappa, self.omega_m
        vac = 1.0 if zero_point else 0.0
        return 8 * self.g_probe ** 2 * k * (vac + 2 * self.n_c) / (k * k + 4 * w * w)

    def thermal(self, zero_point=True):
        return self.gamma * (self.n_m + (0.5 if zero_point else 0.0))


# ---------------------------------------------------------------- feedback chain

@dataclass(frozen=True)
class FeedbackChainState:
    """Band-pass filter, fractional delay and gain of the digital loop.

    ``response(omega)`` includes the zero-order hold of the force, so its
    phase at ``omega_m`` is the loop phase seen by the oscillator.
    """

    b: np.ndarray
    a: np.ndarray
    delay: float
    gain: float
    dt: float
    omega_m: float
    target_phase: float

    @property
    def delay_int(self) -> int:
        return int(math.floor(self.delay))

    @property
    def delay_frac(self) -> float:
        return self.delay - self.delay_int

    def filter_response(self, omega):
        _, h = signal.freqz(self.b, self.a, worN=np.atleast_1d(omega) * self.dt)
        return h

    def response(self, omega, include_gain=False):
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        z = np.exp(-1j * omega * self.dt)
        delay = z ** self.delay_int * ((1 - self.delay_frac) + self.delay_frac * z)
        hold = np.exp(-0.5j * omega * self.dt) * np.sinc(omega * self.dt / (2 * np.pi))
        h = self.filter_response(omega) * delay * hold
        return h * self.gain if include_gain else h

    def phase_error_deg(self) -> float:
        h = self.response(self.omega_m)[0]
        err = np.angle(h * np.exp(-1j * self.target_phase))
        return float(np.degrees(err))

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(np.roots(self.a)) < 1.0))


def design_chain(omega_m, bandwidth, phase, gain, dt) -> FeedbackChainState:
    """Chain whose response at ``omega_m`` has unit magnitude times ``gain`` and phase ``phase``.

    The filter is a second-order resonator. The delay (in samples, linearly
    interpolated) absorbs the residual filter and hold phase.
    """
    fs = 1.0 / dt
    f0 = omega_m / (2 * math.pi)
    if not 0 < f0 < fs / 2:
        raise ValueError("omega_m must lie below the Nyquist frequency")
    q = max(omega_m / bandwidth, 0.5)
    b, a = signal.iirpeak(f0, q, fs=fs)
    period = 2 * math.pi / (omega_m * dt)

    def err(d):
        st = FeedbackChainState(b, a, d, 1.0, dt, omega_m, phase)
        return np.angle(st.response(omega_m)[0] * np.exp(-1j * phase))

    grid = np.linspace(0.0, period + 2.0, int(8 * period) + 9)
    vals = np.array([err(d) for d in grid])
    root = None
    for i in range(grid.size - 1):
        # phase decreases with delay: look for the downward zero crossing
        if vals[i] >= 0 > vals[i + 1] and vals[i] - vals[i + 1] < math.pi:
            root = brentq(err, grid[i], grid[i + 1], xtol=1e-14)
            break
    if root is None:
        raise RuntimeError("could not realise the requested loop phase")
    chain = FeedbackChainState(b, a, root, 1.0, dt, omega_m, phase)
    mag = abs(chain.response(omega_m)[0])
    out = FeedbackChainState(b, a, root, gain / mag, dt, omega_m, phase)
    if not out.is_stable():
        raise RuntimeError("band-pass filter is unstable")
    return out


# ------------------------------------------------------------------- kernel

@numba.njit(cache=True)
def _advance(state, buf, noise, nsub, prop, hold, sig, kgain, bq, dint, dfrac,
             adiabatic, full, out_x, out_p, out_f, energy):
    x, p, pa, z1, z2 = state[0], state[1], state[2], state[3], state[4]
    pos = int(state[5])
    nbuf = buf.size
    b0, b1, b2, a1, a2 = bq[0], bq[1], bq[2], bq[3], bq[4]
    p00, p01, p10, p11 = prop[0], prop[1], prop[2], prop[3]
    h0, h1 = hold[0], hold[1]
    c_th, s_th, s_amp, imp_scale = sig[0], sig[1], sig[2], sig[3]
    ea, pa_gain = full[0], full[1]
    n = out_x.size
    for k in range(n):
        # sum the fine-grid increments belonging to this step
        w0 = 0.0
        w1 = 0.0
        w2 = 0.0
        w3 = 0.0
        base = k * nsub
        for j in range(nsub):
            w0 += noise[base + j, 0]
            w1 += noise[base + j, 1]
            w2 += noise[base + j, 2]
            w3 += noise[base + j, 3]
        if adiabatic:
            s = s_amp * (x * c_th - p * s_th)
        else:
            s = s_amp * pa
        y = s + imp_scale * w3
        v = b0 * y + z1
        z1 = b1 * y - a1 * v + z2
        z2 = b2 * y - a2 * v
        buf[pos] = v
        i0 = (pos - dint) % nbuf
        i1 = (pos - dint - 1) % nbuf
        c = (1.0 - dfrac) * buf[i0] + dfrac * buf[i1]
        pos = (pos + 1) % nbuf
        f = -kgain * c
        xn = p00 * x + p01 * p + h0 * f + w0
        pn = p10 * x + p11 * p + h1 * f + w1 + w2
        if not adiabatic:
            # cavity low-pass driven by the step-averaged position
            pa = pa * ea + pa_gain * 0.5 * (x + xn)
        x = xn
        p = pn
        out_x[k] = x
        out_p[k] = p
        out_f[k] = f
        energy[k] = 0.5 * (x * x + p * p)
    state[0], state[1], state[2], state[3], state[4] = x, p, pa, z1, z2
    state[5] = pos


class _Integrator:
    """Chunked driver around the compiled kernel."""

    def __init__(self, model: ScaledModel, chain: FeedbackChainState, dt, adiabatic,
                 zero_point, noise_scale=1.0):
        self.dt = dt
        M = np.array([[-model.gamma / 2, model.omega_m], [-model.omega_m, -model.gamma / 2]])
        E = expm(M * dt)
        self.prop = E.ravel().copy()
        self.hold = np.linalg.solve(M, (E - np.eye(2)) @ np.array([0.0, 1.0]))
        th = model.cavity_phase
        self.adiabatic = adiabatic
        if adiabatic:
            amp = model.transduction
        else:
            amp = math.sqrt(model.kappa_e)
        self.sig = np.array([math.cos(th), math.sin(th), amp, 0.0])
        ea = math.exp(-model.kappa * dt / 2)
        self.full = np.array([ea, 2 * model.g_probe * (1 - ea) / (model.kappa / 2)])
        self.kgain = model.gain_a0 / math.sqrt(model.kappa_e) * chain.gain
        self.bq = np.array([chain.b[0] / chain.a[0], chain.b[1] / chain.a[0], chain.b[2] / chain.a[0],
                            chain.a[1] / chain.a[0], chain.a[2] / chain.a[0]])
        self.dint, self.dfrac = chain.delay_int, chain.delay_frac
        self.buf = np.zeros(chain.delay_int + 4)
        self.state = np.zeros(6)
        # per-unit-normal increment amplitudes on the fine grid
        self.noise_amp = noise_scale * np.sqrt(np.array([
            model.thermal(zero_point), model.thermal(zero_point),
            model.backaction(zero_point), model.imprecision(zero_point)]))

    def set_state(self, x, p):
        self.state[0], self.state[1] = x, p

    def run(self, increments, nsub):
        """Advance by ``increments.shape[0] // nsub`` steps; returns (x, p, force, energy)."""
        n = increments.shape[0] // nsub
        noise = increments * (self.noise_amp * math.sqrt(self.dt / nsub))
        # imprecision enters as the step average of white noise
        self.sig[3] = 1.0 / self.dt
        out = [np.empty(n) for _ in range(4)]
        _advance(self.state, self.buf, noise, nsub, self.prop, self.hold, self.sig, self.kgain,
                 self.bq, self.dint, self.dfrac, self.adiabatic, self.full, *out)
        return out


# -------------------------------------------------------------------- results

@dataclass(frozen=True)
class Trajectory:
    """Stored (possibly decimated) record in simulated seconds."""

    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    force: np.ndarray
    dt: float

    def to_csv(self, path=None) -> str:
        from .spectrum import SCHEMA_VERSION
        rows = [f"# schema_version: {SCHEMA_VERSION}", "time_s,x,p,feedback_force"]
        rows += [f"{t:.17g},{x:.17g},{p:.17g},{f:.17g}"
                 for t, x, p, f in zip(self.t, self.x, self.p, self.force)]
        text = "\n".join(rows) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


@dataclass(frozen=True)
class SimResult:
    """Outcome of :func:`simulate`.

    Rates ``gamma_eff_*`` are quoted in physical (unscaled) units; the
    ``spectrum`` is the position PSD in simulated units, normalised so that
    integrating over ``omega / 2 pi`` gives the variance of ``x``.
    """

    trajectory: Trajectory
    spectrum: Spectrum
    gamma_eff_fit: float
    gamma_eff_stderr: float
    gamma_eff_expected: float
    occupancy: float
    occupancy_expected: float
    unstable: bool
    scale: float
    chain: FeedbackChainState
    energy_blocks: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {"gamma_eff_fit": self.gamma_eff_fit, "gamma_eff_stderr": self.gamma_eff_stderr,
                "gamma_eff_expected": self.gamma_eff_expected, "occupancy": self.occupancy,
                "occupancy_expected": self.occupancy_expected, "unstable": self.unstable,
                "scale": self.scale, "chain_phase_error_deg": self.chain.phase_error_deg()}


def _budget_expectation(params, tones, fb, zero_point):
    try:
        return closed_form.occupancy_budget(params, tones.probe, fb, zero_point=zero_point).n_m
    except closed_form.InstabilityError:
        return float("inf")


def _prepare(params, tones, fb, sim):
    scale = sim.scale_q or auto_scale(params, tones, fb)
    model = ScaledModel.build(params, tones, fb, scale)
    expected = closed_form.gamma_eff(params, tones.probe, fb).gamma_eff
    g_sim = abs(expected) * scale
    if not sim.dt < 2 * math.pi / (20 * params.omega_m):
        raise ValueError("dt must resolve the oscillation: dt < 2 pi / (20 omega_m)")
    bandwidth = min(max(fb.filter_bandwidth, FILTER_LINEWIDTHS * g_sim), params.omega_m / 2)
    chain = design_chain(params.omega_m, bandwidth, fb.phase_phi, 1.0, sim.dt)
    return scale, model, expected, g_sim, chain


def simulate(params: SystemParams, tones: ToneSet, fb: FeedbackConfig, sim: SimConfig,
             chunk_steps=1 << 21) -> SimResult:
    """Integrate the loop and return the trajectory, position PSD and fitted linewidth.

    The PSD and the occupancy use only the part after ``sim.burn_in``. The
    run is flagged ``unstable`` when the energy grows monotonically over its
    final fifth or overflows; no linewidth is fitted then.
    """
    scale, model, expected, g_sim, chain = _prepare(params, tones, fb, sim)
    if sim.duration <= 20.0 / g_sim:
        raise ValueError(f"duration must exceed 20 expected decay times ({20 / g_sim:.3g} s)")
    dt, nsub = sim.dt, sim.substeps
    n_steps = int(round(sim.duration / dt))
    burn = int(round((20.0 / g_sim if sim.burn_in is None else sim.burn_in) / dt))
    burn = min(burn, n_steps // 2)
    seg_time = 100.0 / g_sim if sim.segment is None else sim.segment
    nperseg = fft.next_fast_len(max(16, int(round(seg_time / dt))), real=True)
    nperseg += nperseg % 2
    hop = nperseg // 2
    record = sim.record_every or max(1, n_steps // (1 << 20))

    integ = _Integrator(model, chain, dt, sim.adiabatic_cavity, sim.zero_point)
    rng = np.random.Generator(np.random.PCG64(sim.seed))
    n_blocks = 100
    block_len = max(1, n_steps // n_blocks)
    e_sum = np.zeros(n_blocks + 1)
    e_cnt = np.zeros(n_blocks + 1)
    stored = {"x": [], "p": [], "f": []}
    psd_acc, psd_segments, freqs = None, 0, None
    tail = np.empty(0)
    occ_sum, occ_cnt = 0.0, 0
    overflow = False
    chunk = max(hop, (chunk_steps // hop) * hop)
    done = 0
    while done < n_steps:
        # the burn-in ends on a chunk boundary so the PSD starts cleanly
        stop = burn if done < burn else n_steps
        n = min(chunk, stop - done)
        inc = rng.standard_normal((n * nsub, NOISE_CHANNELS))
        x, p, f, e = integ.run(inc, nsub)
        idx = done + np.arange(n)
        blk = np.minimum(idx // block_len, n_blocks)
        e_sum += np.bincount(blk, weights=e, minlength=n_blocks + 1)
        e_cnt += np.bincount(blk, minlength=n_blocks + 1)
        offset = (-done) % record
        stored["x"].append(x[offset::record])
        stored["p"].append(p[offset::record])
        stored["f"].append(f[offset::record])
        if not np.all(np.isfinite(e)) or e.max() > 1e60:
            overflow = True
            done += n
            break
        if done >= burn:
            occ_sum += float(e.sum())
            occ_cnt += n
            seq = np.concatenate([tail, x])
            usable = ((seq.size - nperseg) // hop) * hop + nperseg if seq.size >= nperseg else 0
            if usable:
                fr, pxx = signal.welch(seq[:usable], fs=1.0 / dt, window="hann", nperseg=nperseg,
                                       noverlap=nperseg - hop, detrend="constant")
                count = (usable - nperseg) // hop + 1
                psd_acc = pxx * count if psd_acc is None else psd_acc + pxx * count
                psd_segments += count
                freqs = fr
                tail = seq[usable - (nperseg - hop):]
            else:
                tail = seq
        done += n

    blocks = np.where(e_cnt > 0, e_sum / np.maximum(e_cnt, 1), np.nan)[:n_blocks]
    unstable = overflow or _growing(blocks)
    t_all = np.arange(0, done, record) * dt
    x_all = np.concatenate(stored["x"])[:t_all.size]
    traj = Trajectory(t_all, x_all, np.concatenate(stored["p"])[:t_all.size],
                      np.concatenate(stored["f"])[:t_all.size], dt * record)
    half = 0.5 if sim.zero_point else 0.0
    occ_expected = _budget_expectation(params, tones, fb, sim.zero_point)
    if unstable or psd_segments == 0:
        spec = Spectrum(np.array([0.0]), np.array([0.0]), Frame.LAB)
        occupancy = float("inf") if unstable else occ_sum / max(occ_cnt, 1) - half
        return SimResult(traj, spec, float("nan"), float("nan"), expected, occupancy,
                         occ_expected, unstable, scale, chain, blocks)
    spec = Spectrum(2 * math.pi * freqs, psd_acc / psd_segments, Frame.LAB,
                    {"segments": psd_segments, "scale_q": scale})
    fit_g, fit_err = fit_linewidth(spec, params.omega_m, g_sim)
    return SimResult(traj, spec, fit_g / scale, fit_err / scale, expected,
                     occ_sum / occ_cnt - half, occ_expected, False, scale, chain, blocks)


def _growing(blocks, tail_fraction=0.2, factor=2.0):
    """Energy rising block after block over the final part of the run."""
    if np.any(~np.isfinite(blocks)):
        return True
    n = max(4, int(round(tail_fraction * blocks.size)))
    tail = blocks[-n:]
    # coarse-grain to four sub-blocks so noise does not mask the trend
    parts = np.array([c.mean() for c in np.array_split(tail, 4)])
    return bool(np.all(np.diff(parts) > 0) and parts[-1] > factor * parts[0])


def fit_linewidth(spectrum: Spectrum, omega_m, width_guess, widths=10.0):
    """Lorentzian FWHM of the mechanical peak: ``(fwhm, stderr)``."""
    from .inference import fit_lorentzian

    i = int(np.argmax(np.where(np.abs(spectrum.frequencies - omega_m) < 0.5 * omega_m,
                               spectrum.psd, 0.0)))
    center = spectrum.frequencies[i]
    window = (center - widths * width_guess, center + widths * width_guess)
    peak = spectrum.psd[i]
    fit = fit_lorentzian(spectrum, window, init=(center, width_guess, peak, 1e-6 * peak),
                         relative=True)
    return fit.fwhm, fit.stderr["fwhm"]


def estimate_psd(trajectory, segment_length, overlap=0.5, dt=None, component="x") -> Spectrum:
    """Averaged-periodogram one-sided PSD.

    Parameters
    ----------
    trajectory : Trajectory or array
        Record to analyse. A bare array needs ``dt``.
    segment_length : int
        Samples per segment; the record must hold at least eight.
    overlap : float
        Fractional overlap of consecutive segments.

    Returns
    -------
    Spectrum
        Angular frequencies, with ``sum(psd) * d omega / 2 pi`` equal to the
        variance of the record.
    """
    if isinstance(trajectory, Trajectory):
        data = getattr(trajectory, component)
        dt = trajectory.dt
    else:
        data = np.asarray(trajectory, dtype=float)
        if dt is None:
            raise ValueError("dt is required for a bare array")
    segment_length = int(segment_length)
    if data.size < 8 * segment_length:
        raise LengthError(f"record of {data.size} samples is shorter than 8 segments "
                          f"of {segment_length}")
    noverlap = int(round(overlap * segment_length))
    f, pxx = signal.welch(data, fs=1.0 / dt, window="hann", nperseg=segment_length,
                          noverlap=noverlap, detrend="constant")
    return Spectrum(2 * math.pi * f, pxx, Frame.LAB, {"segment_length": segment_length})


def ringdown(params: SystemParams, tones: ToneSet, fb: FeedbackConfig, scale_q, dt=None,
             decay_times=3.0, x0=1.0):
    """Noise-free decay from ``x = x0``: fitted ``(energy decay rate, oscillation frequency)``.

    Rates are in simulated units. Used to check the sign and phase of the loop.
    """
    dt = 2 * math.pi / (STEPS_PER_PERIOD * params.omega_m) if dt is None else dt
    model = ScaledModel.build(params, tones, fb, scale_q)
    g_sim = abs(closed_form.gamma_eff(params, tones.probe, fb).gamma_eff) * scale_q
    bandwidth = min(max(fb.filter_bandwidth, FILTER_LINEWIDTHS * g_sim), params.omega_m / 2)
    chain = design_chain(params.omega_m, bandwidth, fb.phase_phi, 1.0, dt)
    integ = _Integrator(model, chain, dt, True, True, noise_scale=0.0)
    integ.set_state(x0, 0.0)
    n = int(round(decay_times / g_sim / dt))
    x, p, _, _ = integ.run(np.zeros((n, NOISE_CHANNELS)), 1)
    t = (np.arange(n) + 1) * dt
    z = x + 1j * p
    start = int(min(n // 4, 20.0 / bandwidth / dt))
    sl = slice(start, None)
    rate = -2.0 * np.polyfit(t[sl], np.log(np.abs(z[sl])), 1)[0]
    freq = -np.polyfit(t[sl], np.unwrap(np.angle(z[sl])), 1)[0]
    return float(rate), float(freq)
